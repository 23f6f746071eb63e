use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

/// Weights of `softmax(relu(x·W₁ + b₁)·W₂ + b₂)`.
///
/// `w1` is `inputs × hidden` and `w2` is `hidden × classes`, so a batch of
/// row vectors goes through two matrix products.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams<F> {
    pub w1: Array2<F>,
    pub b1: Array1<F>,
    pub w2: Array2<F>,
    pub b2: Array1<F>,
}

impl<F: Scalar> MlpParams<F> {
    pub fn zeros(inputs: usize, hidden: usize, classes: usize) -> Self {
        Self {
            w1: Array2::zeros((inputs, hidden)),
            b1: Array1::zeros(hidden),
            w2: Array2::zeros((hidden, classes)),
            b2: Array1::zeros(classes),
        }
    }

    /// Glorot-uniform weights, zero biases. `W₁` is filled row-major before `W₂`
    /// from one stream seeded with `seed`.
    pub fn init(inputs: usize, hidden: usize, classes: usize, seed: u64) -> Result<Self> {
        if inputs == 0 || hidden == 0 || classes == 0 {
            return Err(Error::invalid("layer sizes must be positive"));
        }
        let mut rng = SplitMix64::new(seed);
        let mut fill = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || F::of(rng.uniform(-limit, limit)))
        };
        let w1 = fill(inputs, hidden);
        let w2 = fill(hidden, classes);
        Ok(Self {
            w1,
            b1: Array1::zeros(hidden),
            w2,
            b2: Array1::zeros(classes),
        })
    }

    pub fn inputs(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.w1.ncols()
    }

    pub fn classes(&self) -> usize {
        self.w2.ncols()
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs(),
                found: cols,
            });
        }
        Ok(())
    }

    fn hidden_pre(&self, x: &ArrayView2<'_, F>) -> Array2<F> {
        let mut z1 = x.dot(&self.w1);
        z1 += &self.b1;
        z1
    }

    /// Output logits for a batch of rows.
    pub fn logits(&self, x: ArrayView2<'_, F>) -> Result<Array2<F>> {
        self.check_input(x.ncols())?;
        let a1 = self.hidden_pre(&x).mapv_into(relu);
        let mut z2 = a1.dot(&self.w2);
        z2 += &self.b2;
        Ok(z2)
    }

    /// Class probabilities for a batch of rows.
    pub fn forward_batch(&self, x: ArrayView2<'_, F>) -> Result<Array2<F>> {
        let mut z = self.logits(x)?;
        for mut row in z.rows_mut() {
            softmax_in_place(row.as_slice_mut().expect("owned rows are contiguous"));
        }
        Ok(z)
    }

    /// Class probabilities for one flattened image.
    pub fn forward(&self, x: &[F]) -> Result<Vec<F>> {
        let view = ArrayView2::from_shape((1, x.len()), x).map_err(|e| Error::invalid(e.to_string()))?;
        Ok(self.forward_batch(view)?.into_raw_vec_and_offset().0)
    }

    /// `Σ_r row_weights[r] · (−ln p_r[y_r])` and its gradient.
    ///
    /// Mean cross-entropy is the case `row_weights = 1/B`; the weighted-sum
    /// objective over stacked corrupted copies uses `w_i / B` on copy `i`.
    pub fn loss_and_grad(&self, x: ArrayView2<'_, F>, labels: &[u8], row_weights: &[F]) -> Result<(F, MlpParams<F>)> {
        self.check_input(x.ncols())?;
        let b = x.nrows();
        for len in [labels.len(), row_weights.len()] {
            if len != b {
                return Err(Error::DimensionMismatch { expected: b, found: len });
            }
        }
        let classes = self.classes();
        if let Some(&y) = labels.iter().find(|&&y| y as usize >= classes) {
            return Err(Error::invalid(format!("label {y} outside 0..{classes}")));
        }

        let z1 = self.hidden_pre(&x);
        let a1 = z1.mapv(relu);
        let mut dz2 = a1.dot(&self.w2);
        dz2 += &self.b2;

        // Turn the logits into (p - onehot) * weight, accumulating the loss on the way.
        let mut loss = F::zero();
        for ((mut row, &y), &w) in dz2.rows_mut().into_iter().zip(labels).zip(row_weights) {
            let row = row.as_slice_mut().expect("owned rows are contiguous");
            let log_p = log_softmax_at(row, y as usize);
            loss += w * -log_p;
            softmax_in_place(row);
            row[y as usize] -= F::one();
            for v in row.iter_mut() {
                *v *= w;
            }
        }

        let gw2 = a1.t().dot(&dz2);
        let gb2 = dz2.sum_axis(Axis(0));
        let mut dz1 = dz2.dot(&self.w2.t());
        Zip::from(&mut dz1).and(&z1).for_each(|d, &z| {
            if z <= F::zero() {
                *d = F::zero();
            }
        });
        let gw1 = x.t().dot(&dz1);
        let gb1 = dz1.sum_axis(Axis(0));
        Ok((
            loss,
            MlpParams {
                w1: gw1,
                b1: gb1,
                w2: gw2,
                b2: gb2,
            },
        ))
    }

    /// `θ ← θ − lr · g`.
    pub fn sgd_step(&mut self, grad: &MlpParams<F>, lr: F) {
        self.w1.scaled_add(-lr, &grad.w1);
        self.b1.scaled_add(-lr, &grad.b1);
        self.w2.scaled_add(-lr, &grad.w2);
        self.b2.scaled_add(-lr, &grad.b2);
    }

    pub fn is_finite(&self) -> bool {
        self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2).all(|v| v.is_finite())
    }

    /// Parameter `i` in the order `W₁, b₁, W₂, b₂`, each row-major.
    pub fn flat_get(&self, i: usize) -> F {
        *self.flat_slot(i)
    }

    pub fn flat_set(&mut self, i: usize, v: F) {
        *self.flat_slot_mut(i) = v;
    }

    fn flat_slot(&self, mut i: usize) -> &F {
        for part in [
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
            self.w2.as_slice().expect("standard layout"),
            self.b2.as_slice().expect("standard layout"),
        ] {
            if i < part.len() {
                return &part[i];
            }
            i -= part.len();
        }
        panic!("parameter index out of range");
    }

    fn flat_slot_mut(&mut self, mut i: usize) -> &mut F {
        for part in [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.b2.as_slice_mut().expect("standard layout"),
        ] {
            if i < part.len() {
                return &mut part[i];
            }
            i -= part.len();
        }
        panic!("parameter index out of range");
    }

    /// Converts every entry to another scalar type.
    pub fn cast<G: Scalar>(&self) -> MlpParams<G> {
        let c = |v: &F| G::of(v.to_f64_lossy());
        MlpParams {
            w1: self.w1.map(c),
            b1: self.b1.map(c),
            w2: self.w2.map(c),
            b2: self.b2.map(c),
        }
    }
}

fn relu<F: Scalar>(v: F) -> F {
    if v > F::zero() {
        v
    } else {
        F::zero()
    }
}

pub(crate) fn softmax_in_place<F: Scalar>(row: &mut [F]) {
    let max = row.iter().copied().fold(F::neg_infinity(), F::max);
    let mut sum = F::zero();
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// `ln softmax(row)[y]`, computed stably from logits.
pub(crate) fn log_softmax_at<F: Scalar>(row: &[F], y: usize) -> F {
    let max = row.iter().copied().fold(F::neg_infinity(), F::max);
    let sum = row.iter().fold(F::zero(), |acc, &v| acc + (v - max).exp());
    row[y] - max - sum.ln()
}
