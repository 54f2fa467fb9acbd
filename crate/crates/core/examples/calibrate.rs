//! Mean absolute pixel change per severity for every corruption, with a
//! monotonicity check. Used when retuning the severity table.

use cbar_core::image::synthetic_image;
use cbar_core::transforms::{entries, Registry, TransformSpec};
use cbar_core::Seed;

fn main() {
    let reg = Registry::default();
    let imgs: Vec<_> = (0..100)
        .map(|i| synthetic_image(32, 32, Seed(1000 + i)))
        .collect();
    for e in entries() {
        let Some((lo, hi)) = e.kind.severity_range() else {
            continue;
        };
        let mut row = Vec::new();
        for s in lo..=hi {
            let mut tot = 0.0;
            for (i, img) in imgs.iter().enumerate() {
                let spec = TransformSpec::corruption(e.name, s, Seed(7).derive("img", i as u64));
                tot += reg.apply(&spec, img).unwrap().mean_abs_diff(img);
            }
            row.push(tot / imgs.len() as f64);
        }
        let mono = row.windows(2).all(|w| w[1] > w[0]);
        let min_gap = row
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(f64::INFINITY, f64::min);
        println!(
            "{:32} {} gap={:.3} {:?}",
            e.name,
            if mono { "ok " } else { "BAD" },
            min_gap,
            row.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        );
    }
}
