//! Loss and metric checks against plain scalar reference loops.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vmkit_core::imgcore::{validity_mask, FlowField, GrayMap, ImageRgb, Plane, Vec2};
use vmkit_core::matteval::{
    loss_alpha, loss_foreground, loss_global, loss_local, temporal_metrics, FramePair,
};

/// Bilinear sample with clamped coordinates, written out longhand.
fn ref_sample(v: &[f64], h: usize, w: usize, x: f64, y: f64) -> f64 {
    let x = x.max(0.0).min((w - 1) as f64);
    let y = y.max(0.0).min((h - 1) as f64);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let at = |xx: usize, yy: usize| v[yy * w + xx];
    (1.0 - fy) * ((1.0 - fx) * at(x0, y0) + fx * at(x1, y0)) + fy * ((1.0 - fx) * at(x0, y1) + fx * at(x1, y1))
}

fn ref_warp(v: &[f64], flow: &[(f64, f64)], h: usize, w: usize) -> Vec<f64> {
    (0..h * w)
        .map(|k| ref_sample(v, h, w, (k % w) as f64 + flow[k].0, (k / w) as f64 + flow[k].1))
        .collect()
}

struct Instance {
    h: usize,
    w: usize,
    pred: Vec<Vec<f64>>,
    gt: Vec<Vec<f64>>,
    pred_fg: Vec<Vec<[f64; 3]>>,
    gt_fg: Vec<Vec<[f64; 3]>>,
    flows: Vec<Vec<(f64, f64)>>,
    valid: Vec<Vec<bool>>,
}

fn random_instance(seed: u64, n: usize, h: usize, w: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = |rng: &mut ChaCha8Rng| (0..h * w).map(|_| rng.gen::<f64>()).collect::<Vec<_>>();
    let pred = (0..n).map(|_| frame(&mut rng)).collect();
    let gt = (0..n).map(|_| frame(&mut rng)).collect();
    let rgb = |rng: &mut ChaCha8Rng| (0..h * w).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect::<Vec<[f64; 3]>>();
    let pred_fg = (0..n).map(|_| rgb(&mut rng)).collect();
    let gt_fg = (0..n).map(|_| rgb(&mut rng)).collect();
    let flows = (1..n)
        .map(|_| (0..h * w).map(|_| (rng.gen_range(-2.5..2.5), rng.gen_range(-2.5..2.5))).collect())
        .collect();
    let valid = (1..n).map(|_| (0..h * w).map(|_| rng.gen_bool(0.7)).collect()).collect();
    Instance { h, w, pred, gt, pred_fg, gt_fg, flows, valid }
}

impl Instance {
    fn maps(&self, v: &[Vec<f64>]) -> Vec<GrayMap> {
        v.iter().map(|d| Plane::new(self.h, self.w, d.clone()).unwrap()).collect()
    }
    fn rgbs(&self, v: &[Vec<[f64; 3]>]) -> Vec<ImageRgb> {
        v.iter().map(|d| Plane::new(self.h, self.w, d.clone()).unwrap()).collect()
    }
    fn pairs(&self, global: bool) -> Vec<FramePair> {
        (0..self.flows.len())
            .map(|k| FramePair {
                from: if global { 0 } else { k },
                to: k + 1,
                flow: Plane::new(self.h, self.w, self.flows[k].iter().map(|&(x, y)| Vec2::new(x, y)).collect()).unwrap(),
                valid: Plane::new(self.h, self.w, self.valid[k].clone()).unwrap(),
            })
            .collect()
    }

    fn ref_alpha(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.pred.len() {
            for k in 0..self.h * self.w {
                s += (self.pred[i][k] - self.gt[i][k]).abs();
            }
        }
        s / (self.pred.len() * self.h * self.w) as f64
    }

    fn ref_temporal(&self, global: bool) -> f64 {
        let n = self.pred.len();
        let mut s = 0.0;
        for i in 1..n {
            let from = if global { 0 } else { i - 1 };
            let carried = ref_warp(&self.pred[from], &self.flows[i - 1], self.h, self.w);
            for k in 0..self.h * self.w {
                if self.valid[i - 1][k] {
                    s += (self.pred[i][k] - carried[k]).abs();
                }
            }
        }
        s / ((n - 1) * self.h * self.w) as f64
    }

    fn ref_foreground(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.pred.len() {
            for k in 0..self.h * self.w {
                let d: f64 = (0..3).map(|c| (self.pred_fg[i][k][c] - self.gt_fg[i][k][c]).abs()).sum();
                s += self.pred[i][k] * d;
            }
        }
        s / (self.pred.len() * self.h * self.w * 3) as f64
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300) || (a - b).abs() < 1e-15
}

#[test]
fn losses_match_reference_loops() {
    for seed in 0..25 {
        let inst = random_instance(seed, 3, 3, 3);
        let pred = inst.maps(&inst.pred);
        let gt = inst.maps(&inst.gt);
        assert!(rel_close(loss_alpha(&pred, &gt).unwrap(), inst.ref_alpha(), 1e-12));
        assert!(rel_close(loss_global(&pred, &inst.pairs(true)).unwrap(), inst.ref_temporal(true), 1e-12));
        assert!(rel_close(loss_local(&pred, &inst.pairs(false)).unwrap(), inst.ref_temporal(false), 1e-12));
        let lf = loss_foreground(&inst.rgbs(&inst.pred_fg), &inst.rgbs(&inst.gt_fg), &pred).unwrap();
        assert!(rel_close(lf, inst.ref_foreground(), 1e-12));
    }
}

#[test]
fn two_frame_clip_global_equals_local() {
    let inst = random_instance(99, 2, 4, 5);
    let pred = inst.maps(&inst.pred);
    assert_eq!(loss_global(&pred, &inst.pairs(true)).unwrap(), loss_local(&pred, &inst.pairs(false)).unwrap());
}

#[test]
fn alpha_loss_symmetric_and_tiling_invariant() {
    let inst = random_instance(5, 3, 3, 4);
    let (pred, gt) = (inst.maps(&inst.pred), inst.maps(&inst.gt));
    assert_eq!(loss_alpha(&pred, &gt).unwrap(), loss_alpha(&gt, &pred).unwrap());
    let tile = |m: &GrayMap| Plane::from_fn(6, 8, |x, y| m.get(x % 4, y % 3));
    let tp: Vec<_> = pred.iter().map(tile).collect();
    let tg: Vec<_> = gt.iter().map(tile).collect();
    assert!(rel_close(loss_alpha(&tp, &tg).unwrap(), loss_alpha(&pred, &gt).unwrap(), 1e-12));
}

#[test]
fn static_clip_constant_prediction_has_no_temporal_loss() {
    let pred = vec![Plane::filled(5, 5, 0.37); 4];
    let pairs: Vec<_> = (1..4)
        .map(|i| FramePair { from: i - 1, to: i, flow: FlowField::zeros(5, 5), valid: validity_mask(&FlowField::zeros(5, 5), 5, 5) })
        .collect();
    assert_eq!(loss_local(&pred, &pairs).unwrap(), 0.0);
}

// ---- metrics ----

fn ref_metrics(pred: &[Vec<f64>], gt: &[Vec<f64>], flows: &[Vec<(f64, f64)>], h: usize, w: usize) -> (f64, f64, f64) {
    let n = pred.len();
    let s = 255.0;
    let mut ssda = 0.0;
    for i in 0..n {
        let mut e = 0.0;
        for k in 0..h * w {
            e += (s * pred[i][k] - s * gt[i][k]).powi(2);
        }
        ssda += e.sqrt();
    }
    let (mut dt, mut me) = (0.0, 0.0);
    for i in 1..n {
        let mut e = 0.0;
        for k in 0..h * w {
            let d = s * ((pred[i][k] - pred[i - 1][k]) - (gt[i][k] - gt[i - 1][k]));
            e += d * d;
        }
        dt += e.sqrt();
        let pw = ref_warp(&pred[i - 1], &flows[i - 1], h, w);
        let gw = ref_warp(&gt[i - 1], &flows[i - 1], h, w);
        let mut m = 0.0;
        for k in 0..h * w {
            m += ((s * (pred[i][k] - gt[i][k])).powi(2) - (s * (pw[k] - gw[k])).powi(2)).abs();
        }
        me += m / (h * w) as f64;
    }
    (ssda / n as f64, dt / (n - 1) as f64, me / (n - 1) as f64)
}

#[test]
fn metrics_match_reference_loops() {
    for seed in 0..10 {
        let inst = random_instance(100 + seed, 4, 5, 6);
        let flows: Vec<FlowField> = inst.pairs(false).into_iter().map(|p| p.flow).collect();
        let m = temporal_metrics(&inst.maps(&inst.pred), &inst.maps(&inst.gt), &flows).unwrap();
        let (a, b, c) = ref_metrics(&inst.pred, &inst.gt, &inst.flows, inst.h, inst.w);
        assert!(rel_close(m.ssda, a, 1e-9) && rel_close(m.dtssd, b, 1e-9) && rel_close(m.messddt, c, 1e-9));
    }
}

#[test]
fn alternating_noise_has_larger_dtssd_than_constant_noise() {
    let gt = vec![Plane::filled(4, 4, 0.5); 4];
    let flows = vec![FlowField::zeros(4, 4); 3];
    let constant: Vec<GrayMap> = (0..4).map(|_| Plane::filled(4, 4, 0.6)).collect();
    let alternating: Vec<GrayMap> = (0..4).map(|i| Plane::filled(4, 4, if i % 2 == 0 { 0.6 } else { 0.4 })).collect();
    let c = temporal_metrics(&constant, &gt, &flows).unwrap();
    let a = temporal_metrics(&alternating, &gt, &flows).unwrap();
    let raw = |v: &[GrayMap]| v.iter().map(|m| m.data().to_vec()).collect::<Vec<_>>();
    let zero = vec![vec![(0.0, 0.0); 16]; 3];
    let (rc, ra) = (ref_metrics(&raw(&constant), &raw(&gt), &zero, 4, 4), ref_metrics(&raw(&alternating), &raw(&gt), &zero, 4, 4));
    assert!((c.ssda - a.ssda).abs() < 1e-9 && (rc.0 - ra.0).abs() < 1e-9);
    assert!(a.dtssd > c.dtssd && ra.1 > rc.1);
}

#[test]
fn metric_scale_laws() {
    // Alphas in [0, 1/255] scaled by 255 must scale SSDA and dtSSD by 255 and MESSDdt by 255².
    let inst = random_instance(7, 3, 4, 4);
    let shrink = |v: &[Vec<f64>]| v.iter().map(|f| f.iter().map(|x| x / 255.0).collect()).collect::<Vec<Vec<f64>>>();
    let flows: Vec<FlowField> = inst.pairs(false).into_iter().map(|p| p.flow).collect();
    let small = temporal_metrics(&inst.maps(&shrink(&inst.pred)), &inst.maps(&shrink(&inst.gt)), &flows).unwrap();
    let full = temporal_metrics(&inst.maps(&inst.pred), &inst.maps(&inst.gt), &flows).unwrap();
    assert!(rel_close(full.ssda, 255.0 * small.ssda, 1e-9));
    assert!(rel_close(full.dtssd, 255.0 * small.dtssd, 1e-9));
    assert!(rel_close(full.messddt, 255.0 * 255.0 * small.messddt, 1e-9));
}
