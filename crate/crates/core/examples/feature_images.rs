// Turn a feature vector into a square grid and resize it into a 32x32 image.

use churnstack::imaging::{plan_grid, resize_bilinear, vector_to_grid, vector_to_image, DEFAULT_IMAGE_SIZE};

fn main() {
    let v: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
    let plan = plan_grid(v.len()).expect("plan");
    println!(
        "{} features -> {}x{} grid, {} padded cells",
        v.len(),
        plan.rows,
        plan.cols,
        plan.pad
    );

    let grid = vector_to_grid(&v, plan).expect("grid");
    let big = resize_bilinear(&grid, 8, 8).expect("resize");
    for r in 0..big.rows {
        let row: Vec<String> = (0..big.cols).map(|c| format!("{:.2}", big.get(r, c))).collect();
        println!("{}", row.join(" "));
    }

    let image = vector_to_image(&v, DEFAULT_IMAGE_SIZE, 0).expect("image");
    let pgm = image.to_pgm();
    println!("PGM header: {}", pgm.lines().take(3).collect::<Vec<_>>().join(" | "));
}
