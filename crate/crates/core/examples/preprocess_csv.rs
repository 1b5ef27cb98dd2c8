// Load a CSV with missing values and a categorical column, fit the
// preprocessing chain on one part and apply it to another.

use churnstack::tabular::{read_csv, CsvOptions, Preprocessor, DEFAULT_DROP_THRESHOLD};

fn main() {
    let csv = "\
tenure,plan,calls,mostly_empty,churn
12,gold,3,NA,0
NA,silver,7,NA,1
30,gold,NA,NA,0
5,bronze,9,NA,1
18,silver,2,4,0
25,NA,1,NA,0
";
    let opts = CsvOptions::new("churn", "1");
    let data = read_csv(csv.as_bytes(), &opts).expect("parse");
    println!("{} rows x {} columns", data.n_rows(), data.n_cols());

    let train = data.subset(&[0, 1, 2, 3]);
    let test = data.subset(&[4, 5]);
    let (pre, encoded) = Preprocessor::fit(&train, DEFAULT_DROP_THRESHOLD).expect("fit");
    println!("encoded columns: {:?}", encoded.column_names());
    print!("{}", pre.report().to_text());

    let applied = pre.apply(&test).expect("apply");
    for row in applied.numeric_rows().expect("numeric") {
        println!("{row:?}");
    }
}
