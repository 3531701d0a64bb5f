// Scratch probe: 10-frame quantized-direction overlap for candidate prism
// rates (deleted before release).
use licam_core::synth::ScanPatternParams;
use std::collections::BTreeSet;

fn overlap_for(params: &ScanPatternParams) -> (f64, f64) {
    let q = 0.05f64.to_radians();
    let frames = 10;
    let per_frame = (params.point_rate * params.frame_period) as usize;
    let step = 1.0 / params.point_rate;
    let sets: Vec<BTreeSet<(i64, i64)>> = (0..frames)
        .map(|f| {
            (0..per_frame)
                .map(|k| {
                    let t = f as f64 * params.frame_period + k as f64 * step;
                    let d = params.beam_direction(t);
                    let az = d.y.atan2(d.x);
                    let el = d.z.asin();
                    ((az / q).round() as i64, (el / q).round() as i64)
                })
                .collect()
        })
        .collect();
    let mut max_min_ratio = 0.0f64;
    let mut max_jaccard = 0.0f64;
    for i in 0..frames {
        for j in (i + 1)..frames {
            let inter = sets[i].intersection(&sets[j]).count() as f64;
            let union = (sets[i].len() + sets[j].len()) as f64 - inter;
            max_min_ratio = max_min_ratio.max(inter / sets[i].len().min(sets[j].len()) as f64);
            max_jaccard = max_jaccard.max(inter / union);
        }
    }
    (max_min_ratio, max_jaccard)
}

fn main() {
    for (rpm1, rpm2) in [
        (7294.0, -4665.0),
        (7294.0, -4667.0),
        (7294.0, -4669.0),
        (7294.0, -4671.0),
        (7294.0, -4673.0),
        (7294.0, -4675.0),
        (7294.0, -4677.0),
        (7291.0, -4671.0),
        (7297.0, -4671.0),
        (7289.0, -4673.0),
        (7301.0, -4667.0),
    ] {
        let params = ScanPatternParams {
            omega1: 2.0 * std::f64::consts::PI * rpm1 / 60.0,
            omega2: 2.0 * std::f64::consts::PI * rpm2 / 60.0,
            ..ScanPatternParams::default()
        };
        let (m, j) = overlap_for(&params);
        println!("rpm ({rpm1:>8}, {rpm2:>8}): overlap/min {m:.4}  jaccard {j:.4}");
    }
}
