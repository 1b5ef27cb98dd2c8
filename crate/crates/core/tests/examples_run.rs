// Every example compiles into this test binary and runs to completion.

mod preprocess_csv {
    include!("../examples/preprocess_csv.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod feature_images {
    include!("../examples/feature_images.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod train_cnn {
    include!("../examples/train_cnn.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod gradient_check {
    include!("../examples/gradient_check.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod transfer_finetune {
    include!("../examples/transfer_finetune.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod gp_adaboost {
    include!("../examples/gp_adaboost.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod roc_auc {
    include!("../examples/roc_auc.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod synth {
    include!("../examples/synth.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod full_pipeline {
    include!("../examples/full_pipeline.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod ablation {
    include!("../examples/ablation.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod run_from_config {
    include!("../examples/run_from_config.rs");

    #[test]
    fn runs() {
        main();
    }
}
