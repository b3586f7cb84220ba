//! Two-layer convolutional classifier over 8x16 heatmaps.
//!
//! conv3x3(1 -> c1) + BN + ReLU, conv3x3(c1 -> c2) + BN + ReLU, flatten,
//! dense(hidden) + ReLU, dense(classes), softmax. Convolutions use same
//! padding and no bias (batch norm supplies the shift). Activations are kept
//! NHWC as `[batch * positions, channels]` matrices so both convolutions are
//! a single GEMM over im2col patches.

use ndarray::{Array1, Array2, ArrayView2, Axis, NdFloat, Zip};
use num_traits::FromPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::eval::GestureClassifier;
use super::MlError;
use crate::dsp::Heatmap;
use crate::gesture::Gesture;

pub trait Real: NdFloat + FromPrimitive {}
impl<T: NdFloat + FromPrimitive> Real for T {}

fn c<F: Real>(v: f64) -> F {
    F::from_f64(v).expect("representable")
}

pub const BN_MOMENTUM: f64 = 0.1;
pub const BN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arch {
    pub rows: usize,
    pub cols: usize,
    pub conv1: usize,
    pub conv2: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl Arch {
    pub fn standard(classes: usize) -> Self {
        Self {
            rows: 8,
            cols: 16,
            conv1: 128,
            conv2: 128,
            hidden: 128,
            classes,
        }
    }

    pub fn positions(&self) -> usize {
        self.rows * self.cols
    }

    pub fn n_params(&self) -> usize {
        let p = self.positions();
        9 * self.conv1
            + 2 * self.conv1
            + 9 * self.conv1 * self.conv2
            + 2 * self.conv2
            + p * self.conv2 * self.hidden
            + self.hidden
            + self.hidden * self.classes
            + self.classes
    }
}

/// Trainable tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Params<F> {
    pub w1: Array2<F>,
    pub gamma1: Array1<F>,
    pub beta1: Array1<F>,
    pub w2: Array2<F>,
    pub gamma2: Array1<F>,
    pub beta2: Array1<F>,
    pub w3: Array2<F>,
    pub b3: Array1<F>,
    pub w4: Array2<F>,
    pub b4: Array1<F>,
}

impl<F: Real> Params<F> {
    pub fn zeros(a: &Arch) -> Self {
        Self {
            w1: Array2::zeros((9, a.conv1)),
            gamma1: Array1::zeros(a.conv1),
            beta1: Array1::zeros(a.conv1),
            w2: Array2::zeros((9 * a.conv1, a.conv2)),
            gamma2: Array1::zeros(a.conv2),
            beta2: Array1::zeros(a.conv2),
            w3: Array2::zeros((a.positions() * a.conv2, a.hidden)),
            b3: Array1::zeros(a.hidden),
            w4: Array2::zeros((a.hidden, a.classes)),
            b4: Array1::zeros(a.classes),
        }
    }

    pub fn tensors(&self) -> [&[F]; 10] {
        [
            self.w1.as_slice().unwrap(),
            self.gamma1.as_slice().unwrap(),
            self.beta1.as_slice().unwrap(),
            self.w2.as_slice().unwrap(),
            self.gamma2.as_slice().unwrap(),
            self.beta2.as_slice().unwrap(),
            self.w3.as_slice().unwrap(),
            self.b3.as_slice().unwrap(),
            self.w4.as_slice().unwrap(),
            self.b4.as_slice().unwrap(),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [F]; 10] {
        [
            self.w1.as_slice_mut().unwrap(),
            self.gamma1.as_slice_mut().unwrap(),
            self.beta1.as_slice_mut().unwrap(),
            self.w2.as_slice_mut().unwrap(),
            self.gamma2.as_slice_mut().unwrap(),
            self.beta2.as_slice_mut().unwrap(),
            self.w3.as_slice_mut().unwrap(),
            self.b3.as_slice_mut().unwrap(),
            self.w4.as_slice_mut().unwrap(),
            self.b4.as_slice_mut().unwrap(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnRunning<F> {
    pub mean: Array1<F>,
    pub var: Array1<F>,
}

impl<F: Real> BnRunning<F> {
    fn new(n: usize) -> Self {
        Self {
            mean: Array1::zeros(n),
            var: Array1::ones(n),
        }
    }
}

/// Batch statistics of one training forward pass (mean, unbiased variance).
#[derive(Debug, Clone)]
pub struct BatchStats<F>(pub [(Array1<F>, Array1<F>); 2]);

struct BnCache<F> {
    xhat: Array2<F>,
    inv_std: Array1<F>,
}

struct Cache<F> {
    col1: Array2<F>,
    bn1: BnCache<F>,
    y1: Array2<F>,
    col2: Array2<F>,
    bn2: BnCache<F>,
    y2: Array2<F>,
    flat: Array2<F>,
    h: Array2<F>,
    r: Array2<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cnn<F> {
    pub arch: Arch,
    pub labels: Vec<Gesture>,
    pub params: Params<F>,
    pub bn: [BnRunning<F>; 2],
}

/// 3x3 same-padded patches of `[batch * rows * cols, ch]` activations.
/// Output columns are ordered (kernel row, kernel col, channel).
fn im2col<F: Real>(x: ArrayView2<F>, a: &Arch) -> Array2<F> {
    let ch = x.ncols();
    let p = a.positions();
    let batch = x.nrows() / p;
    let mut out = Array2::<F>::zeros((x.nrows(), 9 * ch));
    let xs = x.as_slice().expect("standard layout");
    let os = out.as_slice_mut().unwrap();
    for b in 0..batch {
        for r in 0..a.rows {
            for cc in 0..a.cols {
                let row = b * p + r * a.cols + cc;
                let dst = &mut os[row * 9 * ch..(row + 1) * 9 * ch];
                for kr in 0..3 {
                    let rr = r as isize + kr as isize - 1;
                    if rr < 0 || rr >= a.rows as isize {
                        continue;
                    }
                    for kc in 0..3 {
                        let c2 = cc as isize + kc as isize - 1;
                        if c2 < 0 || c2 >= a.cols as isize {
                            continue;
                        }
                        let src = b * p + rr as usize * a.cols + c2 as usize;
                        let k = kr * 3 + kc;
                        dst[k * ch..(k + 1) * ch].copy_from_slice(&xs[src * ch..(src + 1) * ch]);
                    }
                }
            }
        }
    }
    out
}

/// Adjoint of [`im2col`].
fn col2im<F: Real>(dcol: &Array2<F>, ch: usize, a: &Arch) -> Array2<F> {
    let p = a.positions();
    let batch = dcol.nrows() / p;
    let mut out = Array2::<F>::zeros((dcol.nrows(), ch));
    let ds = dcol.as_slice().expect("standard layout");
    let os = out.as_slice_mut().unwrap();
    for b in 0..batch {
        for r in 0..a.rows {
            for cc in 0..a.cols {
                let row = b * p + r * a.cols + cc;
                let src_row = &ds[row * 9 * ch..(row + 1) * 9 * ch];
                for kr in 0..3 {
                    let rr = r as isize + kr as isize - 1;
                    if rr < 0 || rr >= a.rows as isize {
                        continue;
                    }
                    for kc in 0..3 {
                        let c2 = cc as isize + kc as isize - 1;
                        if c2 < 0 || c2 >= a.cols as isize {
                            continue;
                        }
                        let dst = b * p + rr as usize * a.cols + c2 as usize;
                        let k = kr * 3 + kc;
                        for (o, &g) in os[dst * ch..(dst + 1) * ch]
                            .iter_mut()
                            .zip(&src_row[k * ch..(k + 1) * ch])
                        {
                            *o += g;
                        }
                    }
                }
            }
        }
    }
    out
}

fn relu_inplace<F: Real>(x: &mut Array2<F>) {
    x.mapv_inplace(|v| if v > F::zero() { v } else { F::zero() });
}

fn relu_backward<F: Real>(grad: &mut Array2<F>, pre: &Array2<F>) {
    Zip::from(grad).and(pre).for_each(|g, &p| {
        if p <= F::zero() {
            *g = F::zero();
        }
    });
}

fn bn_train<F: Real>(
    z: &Array2<F>,
    gamma: &Array1<F>,
    beta: &Array1<F>,
) -> (Array2<F>, BnCache<F>, (Array1<F>, Array1<F>)) {
    let n = z.nrows();
    let nf: F = c(n as f64);
    let mean = z.mean_axis(Axis(0)).unwrap();
    let centered = z - &mean;
    let var = centered.mapv(|v| v * v).sum_axis(Axis(0)) / nf;
    let inv_std = var.mapv(|v| F::one() / (v + c(BN_EPS)).sqrt());
    let xhat = centered * &inv_std;
    let y = &xhat * gamma + beta;
    let unbiased = if n > 1 {
        &var * (nf / (nf - F::one()))
    } else {
        var
    };
    (y, BnCache { xhat, inv_std }, (mean, unbiased))
}

fn bn_eval<F: Real>(z: &mut Array2<F>, gamma: &Array1<F>, beta: &Array1<F>, run: &BnRunning<F>) {
    let scale = Zip::from(gamma)
        .and(&run.var)
        .map_collect(|&g, &v| g / (v + c(BN_EPS)).sqrt());
    let shift = Zip::from(beta)
        .and(&run.mean)
        .and(&scale)
        .map_collect(|&b, &m, &s| b - m * s);
    *z *= &scale;
    *z += &shift;
}

/// Returns dz and writes dgamma, dbeta.
fn bn_backward<F: Real>(
    dy: &Array2<F>,
    cache: &BnCache<F>,
    gamma: &Array1<F>,
    dgamma: &mut Array1<F>,
    dbeta: &mut Array1<F>,
) -> Array2<F> {
    let nf: F = c(dy.nrows() as f64);
    *dbeta = dy.sum_axis(Axis(0));
    *dgamma = (dy * &cache.xhat).sum_axis(Axis(0));
    let dxhat = dy * gamma;
    let sum_dxhat = dxhat.sum_axis(Axis(0));
    let sum_dxhat_xhat = (&dxhat * &cache.xhat).sum_axis(Axis(0));
    let mut dz = dxhat * nf - &sum_dxhat - &(&cache.xhat * &sum_dxhat_xhat);
    dz *= &(&cache.inv_std / nf);
    dz
}

/// Row-wise softmax in place.
pub fn softmax_rows<F: Real>(logits: &mut Array2<F>) {
    for mut row in logits.rows_mut() {
        let m = row.fold(F::neg_infinity(), |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
}

/// Mean cross-entropy of row-wise probabilities.
pub fn cross_entropy<F: Real>(probs: &Array2<F>, labels: &[usize]) -> F {
    let tiny: F = c(1e-12);
    let total = labels
        .iter()
        .enumerate()
        .fold(F::zero(), |acc, (i, &y)| acc - probs[[i, y]].max(tiny).ln());
    total / c(labels.len() as f64)
}

impl<F: Real> Cnn<F> {
    /// He-initialized network.
    pub fn new(arch: Arch, labels: Vec<Gesture>, seed: u64) -> Self {
        assert_eq!(labels.len(), arch.classes);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Params::zeros(&arch);
        let mut fill = |w: &mut Array2<F>, fan_in: usize, gain: f64| {
            let std = (gain / fan_in as f64).sqrt();
            w.mapv_inplace(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                c(z * std)
            });
        };
        fill(&mut params.w1, 9, 2.0);
        fill(&mut params.w2, 9 * arch.conv1, 2.0);
        fill(&mut params.w3, arch.positions() * arch.conv2, 2.0);
        fill(&mut params.w4, arch.hidden, 1.0);
        params.gamma1.fill(F::one());
        params.gamma2.fill(F::one());
        Self {
            arch,
            labels,
            params,
            bn: [BnRunning::new(arch.conv1), BnRunning::new(arch.conv2)],
        }
    }

    /// Stacks heatmaps into a `[batch, positions]` input.
    pub fn input(&self, heatmaps: &[&Heatmap]) -> Result<Array2<F>, MlError> {
        let p = self.arch.positions();
        let mut x = Array2::zeros((heatmaps.len(), p));
        for (mut row, h) in x.rows_mut().into_iter().zip(heatmaps) {
            if h.cells.len() != p {
                return Err(MlError::ShapeMismatch {
                    expected: p,
                    found: h.cells.len(),
                });
            }
            row.iter_mut().zip(&h.cells).for_each(|(d, &v)| *d = c(v));
        }
        Ok(x)
    }

    fn forward_train(&self, x: &Array2<F>) -> (Array2<F>, Cache<F>, BatchStats<F>) {
        let a = &self.arch;
        let p = &self.params;
        let batch = x.nrows();
        let x0 = x
            .view()
            .into_shape_with_order((batch * a.positions(), 1))
            .unwrap();
        let col1 = im2col(x0, a);
        let z1 = col1.dot(&p.w1);
        let (y1, bn1, s1) = bn_train(&z1, &p.gamma1, &p.beta1);
        let mut a1 = y1.clone();
        relu_inplace(&mut a1);
        let col2 = im2col(a1.view(), a);
        let z2 = col2.dot(&p.w2);
        let (y2, bn2, s2) = bn_train(&z2, &p.gamma2, &p.beta2);
        let mut a2 = y2.clone();
        relu_inplace(&mut a2);
        let flat = a2
            .into_shape_with_order((batch, a.positions() * a.conv2))
            .unwrap();
        let h = flat.dot(&p.w3) + &p.b3;
        let mut r = h.clone();
        relu_inplace(&mut r);
        let logits = r.dot(&p.w4) + &p.b4;
        let cache = Cache {
            col1,
            bn1,
            y1,
            col2,
            bn2,
            y2,
            flat,
            h,
            r,
        };
        (logits, cache, BatchStats([s1, s2]))
    }

    /// Training-mode loss and gradient on one batch. Running statistics are
    /// left untouched; apply the returned batch statistics with
    /// [`Cnn::update_running`].
    pub fn loss_and_grad(&self, x: &Array2<F>, labels: &[usize]) -> (F, Params<F>, BatchStats<F>) {
        let a = &self.arch;
        let p = &self.params;
        let batch = x.nrows();
        let (mut probs, cache, stats) = self.forward_train(x);
        softmax_rows(&mut probs);
        let loss = cross_entropy(&probs, labels);

        let mut g = Params::zeros(a);
        let inv_b: F = c(1.0 / batch as f64);
        let mut dlogits = probs;
        for (i, &y) in labels.iter().enumerate() {
            dlogits[[i, y]] -= F::one();
        }
        dlogits *= inv_b;
        g.w4 = cache.r.t().dot(&dlogits);
        g.b4 = dlogits.sum_axis(Axis(0));
        let mut dh = dlogits.dot(&p.w4.t());
        relu_backward(&mut dh, &cache.h);
        g.w3 = cache.flat.t().dot(&dh);
        g.b3 = dh.sum_axis(Axis(0));
        let dflat = dh.dot(&p.w3.t());
        let mut dy2 = dflat
            .into_shape_with_order((batch * a.positions(), a.conv2))
            .unwrap();
        relu_backward(&mut dy2, &cache.y2);
        let dz2 = bn_backward(&dy2, &cache.bn2, &p.gamma2, &mut g.gamma2, &mut g.beta2);
        g.w2 = cache.col2.t().dot(&dz2);
        let dcol2 = dz2.dot(&p.w2.t());
        let mut dy1 = col2im(&dcol2, a.conv1, a);
        relu_backward(&mut dy1, &cache.y1);
        let dz1 = bn_backward(&dy1, &cache.bn1, &p.gamma1, &mut g.gamma1, &mut g.beta1);
        g.w1 = cache.col1.t().dot(&dz1);
        (loss, g, stats)
    }

    /// Training-mode loss only.
    pub fn train_loss(&self, x: &Array2<F>, labels: &[usize]) -> F {
        let (mut probs, _, _) = self.forward_train(x);
        softmax_rows(&mut probs);
        cross_entropy(&probs, labels)
    }

    pub fn update_running(&mut self, stats: &BatchStats<F>) {
        let m: F = c(BN_MOMENTUM);
        for (run, (mean, var)) in self.bn.iter_mut().zip(&stats.0) {
            run.mean = &run.mean * (F::one() - m) + &(mean * m);
            run.var = &run.var * (F::one() - m) + &(var * m);
        }
    }

    /// Inference-mode class probabilities, one row per input row.
    pub fn forward_eval(&self, x: &Array2<F>) -> Array2<F> {
        let a = &self.arch;
        let p = &self.params;
        let batch = x.nrows();
        let x0 = x
            .view()
            .into_shape_with_order((batch * a.positions(), 1))
            .unwrap();
        let mut z1 = im2col(x0, a).dot(&p.w1);
        bn_eval(&mut z1, &p.gamma1, &p.beta1, &self.bn[0]);
        relu_inplace(&mut z1);
        let mut z2 = im2col(z1.view(), a).dot(&p.w2);
        bn_eval(&mut z2, &p.gamma2, &p.beta2, &self.bn[1]);
        relu_inplace(&mut z2);
        let flat = z2
            .into_shape_with_order((batch, a.positions() * a.conv2))
            .unwrap();
        let mut h = flat.dot(&p.w3) + &p.b3;
        relu_inplace(&mut h);
        let mut logits = h.dot(&p.w4) + &p.b4;
        softmax_rows(&mut logits);
        logits
    }
}

/// Rows per inference call when scoring large sets.
const EVAL_CHUNK: usize = 256;

impl<F: Real> GestureClassifier for Cnn<F> {
    fn labels(&self) -> &[Gesture] {
        &self.labels
    }

    fn predict_batch(&self, heatmaps: &[&Heatmap]) -> Result<Vec<Vec<f64>>, MlError> {
        let mut out = Vec::with_capacity(heatmaps.len());
        for chunk in heatmaps.chunks(EVAL_CHUNK) {
            let probs = self.forward_eval(&self.input(chunk)?);
            out.extend(
                probs
                    .rows()
                    .into_iter()
                    .map(|r| r.iter().map(|v| v.to_f64().unwrap()).collect()),
            );
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gesture::Arm;
    use rand::Rng;

    fn tiny(classes: usize) -> Arch {
        Arch {
            rows: 4,
            cols: 5,
            conv1: 3,
            conv2: 2,
            hidden: 4,
            classes,
        }
    }

    #[test]
    fn standard_parameter_count() {
        let a = Arch::standard(5);
        let cnn = Cnn::<f32>::new(a, Gesture::ALL.to_vec(), 0);
        let n: usize = cnn.params.tensors().iter().map(|t| t.len()).sum();
        assert_eq!(n, a.n_params());
    }

    #[test]
    fn im2col_col2im_are_adjoint() {
        let a = tiny(2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = Array2::from_shape_fn((2 * a.positions(), 3), |_| rng.gen::<f64>() - 0.5);
        let y = Array2::from_shape_fn((2 * a.positions(), 27), |_| rng.gen::<f64>() - 0.5);
        let lhs = (&im2col(x.view(), &a) * &y).sum();
        let rhs = (&x * &col2im(&y, 3, &a)).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let a = Arch::standard(3);
        let cnn = Cnn::<f32>::new(
            a,
            vec![Gesture::Rest, Gesture::WristBack, Gesture::WristSupination],
            1,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let hs: Vec<Heatmap> = (0..5)
            .map(|_| {
                Heatmap::from_cells(
                    Arm::Right,
                    (0..128).map(|_| rng.gen::<f64>() * 100.0).collect(),
                    0,
                )
            })
            .collect();
        let refs: Vec<&Heatmap> = hs.iter().collect();
        for p in cnn.predict_batch(&refs).unwrap() {
            assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn wrong_shape_refused() {
        let cnn = Cnn::<f32>::new(tiny(2), vec![Gesture::Rest, Gesture::WristBack], 1);
        let h = Heatmap::zeros(Arm::Left);
        assert!(matches!(
            cnn.predict(&h),
            Err(MlError::ShapeMismatch {
                expected: 20,
                found: 128
            })
        ));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let a = tiny(3);
        let mut cnn = Cnn::<f64>::new(
            a,
            vec![Gesture::Rest, Gesture::WristBack, Gesture::WristForward],
            11,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // Nonzero BN shifts and biases so no unit sits exactly on a ReLU kink.
        for t in cnn.params.tensors_mut() {
            for v in t.iter_mut() {
                *v += 0.05 * (rng.gen::<f64>() - 0.5);
            }
        }
        let x = Array2::from_shape_fn((4, a.positions()), |_| rng.gen::<f64>() * 3.0);
        let y = [0, 2, 1, 2];
        let (_, grad, _) = cnn.loss_and_grad(&x, &y);
        let sizes: Vec<usize> = grad.tensors().iter().map(|t| t.len()).collect();
        let total: usize = sizes.iter().sum();
        let h = 1e-6;
        let mut checked = 0;
        let mut probe = 0usize;
        while checked < 100 {
            probe = (probe + 37) % total;
            let (mut ti, mut off) = (0, probe);
            while off >= sizes[ti] {
                off -= sizes[ti];
                ti += 1;
            }
            let analytic = grad.tensors()[ti][off];
            let orig = cnn.params.tensors()[ti][off];
            cnn.params.tensors_mut()[ti][off] = orig + h;
            let lp = cnn.train_loss(&x, &y);
            cnn.params.tensors_mut()[ti][off] = orig - h;
            let lm = cnn.train_loss(&x, &y);
            cnn.params.tensors_mut()[ti][off] = orig;
            let numeric = (lp - lm) / (2.0 * h);
            let scale = analytic.abs().max(numeric.abs());
            if scale > 1e-7 {
                assert!(
                    (analytic - numeric).abs() / scale <= 1e-4,
                    "tensor {ti}[{off}]: analytic {analytic} numeric {numeric}"
                );
            } else {
                assert!((analytic - numeric).abs() < 1e-9);
            }
            checked += 1;
        }
    }
}
