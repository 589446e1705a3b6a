//! Dense complex linear-algebra helpers shared by the operator, superoperator
//! and trajectory code.
//!
//! Vectorization is column-stacking throughout: entry `rho[(i, j)]` of a
//! `d x d` matrix lives at index `i + d * j`, so that
//! `vec(A X B) = (B^T ⊗ A) vec(X)`.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, MatRef};

pub type CMat = Mat<c64>;

pub(crate) const I: c64 = c64 { re: 0.0, im: 1.0 };
pub(crate) const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub(crate) const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

pub fn scaled(a: MatRef<'_, c64>, k: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * k)
}

pub fn add_scaled(acc: &mut CMat, a: MatRef<'_, c64>, k: c64) {
    for j in 0..acc.ncols() {
        for i in 0..acc.nrows() {
            acc[(i, j)] += a[(i, j)] * k;
        }
    }
}

pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn adjoint(a: MatRef<'_, c64>) -> CMat {
    a.adjoint().to_owned()
}

pub fn commutator(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    a * b - b * a
}

pub fn frobenius(a: MatRef<'_, c64>) -> f64 {
    a.norm_l2()
}

pub fn trace(a: MatRef<'_, c64>) -> c64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// `tr(rho * op)`.
pub fn expectation(rho: MatRef<'_, c64>, op: MatRef<'_, c64>) -> c64 {
    let d = rho.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            acc += rho[(i, k)] * op[(k, i)];
        }
    }
    acc
}

/// `<psi| op |psi>` for a (not necessarily normalized) vector.
pub fn braket(psi: &[c64], op: MatRef<'_, c64>) -> c64 {
    let d = psi.len();
    let mut acc = ZERO;
    for i in 0..d {
        let mut row = ZERO;
        for j in 0..d {
            row += op[(i, j)] * psi[j];
        }
        acc += psi[i].conj() * row;
    }
    acc
}

pub fn vectorize(rho: MatRef<'_, c64>) -> Mat<c64> {
    let d = rho.nrows();
    Mat::from_fn(d * d, 1, |k, _| rho[(k % d, k / d)])
}

pub fn unvectorize(v: MatRef<'_, c64>, d: usize) -> CMat {
    Mat::from_fn(d, d, |i, j| v[(i + d * j, 0)])
}

pub fn projector(psi: &[c64]) -> CMat {
    let d = psi.len();
    Mat::from_fn(d, d, |i, j| psi[i] * psi[j].conj())
}

pub fn hermitian_part(a: MatRef<'_, c64>) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

pub fn hermiticity_residual(a: MatRef<'_, c64>) -> f64 {
    (a - a.adjoint()).norm_l2()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: MatRef<'_, c64>) -> crate::Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| crate::Error::Eigensolver(format!("{e:?}")))
}

/// Trace distance `||a - b||_1 / 2` between two Hermitian matrices.
pub fn trace_distance(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> crate::Result<f64> {
    let diff = hermitian_part((a - b).as_ref());
    let eigs = hermitian_eigenvalues(diff.as_ref())?;
    Ok(0.5 * eigs.iter().map(|x| x.abs()).sum::<f64>())
}

/// Maximum absolute column sum.
pub fn norm_one(a: MatRef<'_, c64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Complex vector with split real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SplitVec {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl SplitVec {
    pub fn zeros(d: usize) -> Self {
        Self { re: vec![0.0; d], im: vec![0.0; d] }
    }

    pub fn from_complex(x: &[c64]) -> Self {
        Self { re: x.iter().map(|z| z.re).collect(), im: x.iter().map(|z| z.im).collect() }
    }

    pub fn to_complex(&self) -> Vec<c64> {
        self.re.iter().zip(&self.im).map(|(&r, &i)| c64::new(r, i)).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.re.iter().map(|x| x * x).sum::<f64>() + self.im.iter().map(|x| x * x).sum::<f64>()
    }

    pub fn scale(&mut self, k: f64) {
        self.re.iter_mut().for_each(|x| *x *= k);
        self.im.iter_mut().for_each(|x| *x *= k);
    }

    /// `Re <self|other>`.
    pub fn real_dot(&self, other: &Self) -> f64 {
        self.re.iter().zip(&other.re).map(|(a, b)| a * b).sum::<f64>()
            + self.im.iter().zip(&other.im).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Row-major square matrix with split storage, for the trajectory inner
/// loop. Matrices that are mostly zero (the ladder operators) are kept in
/// compressed rows.
#[derive(Debug, Clone)]
pub(crate) struct DenseOp {
    d: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    sparse: Option<Csr>,
}

#[derive(Debug, Clone)]
struct Csr {
    row_start: Vec<usize>,
    col: Vec<usize>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl DenseOp {
    pub fn new(a: MatRef<'_, c64>) -> Self {
        let d = a.nrows();
        let mut re = Vec::with_capacity(d * d);
        let mut im = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                re.push(a[(i, j)].re);
                im.push(a[(i, j)].im);
            }
        }
        let nnz = re.iter().zip(&im).filter(|(r, i)| **r != 0.0 || **i != 0.0).count();
        let sparse = (nnz * 4 <= d * d).then(|| {
            let mut csr = Csr { row_start: vec![0], col: Vec::new(), re: Vec::new(), im: Vec::new() };
            for i in 0..d {
                for j in 0..d {
                    let (r, m) = (re[i * d + j], im[i * d + j]);
                    if r != 0.0 || m != 0.0 {
                        csr.col.push(j);
                        csr.re.push(r);
                        csr.im.push(m);
                    }
                }
                csr.row_start.push(csr.col.len());
            }
            csr
        });
        Self { d, re, im, sparse }
    }

    #[inline]
    pub fn apply(&self, x: &SplitVec, out: &mut SplitVec) {
        if let Some(csr) = &self.sparse {
            for i in 0..self.d {
                let (mut r, mut m) = (0.0, 0.0);
                for k in csr.row_start[i]..csr.row_start[i + 1] {
                    let (p, q, j) = (csr.re[k], csr.im[k], csr.col[k]);
                    r += p * x.re[j] - q * x.im[j];
                    m += p * x.im[j] + q * x.re[j];
                }
                out.re[i] = r;
                out.im[i] = m;
            }
            return;
        }
        let d = self.d;
        let (xr, xi) = (&x.re[..d], &x.im[..d]);
        for (i, (rrow, irow)) in self.re.chunks_exact(d).zip(self.im.chunks_exact(d)).enumerate() {
            let mut sr = [0.0f64; 4];
            let mut si = [0.0f64; 4];
            let mut ar = rrow.chunks_exact(4);
            let mut ai = irow.chunks_exact(4);
            let mut ur = xr.chunks_exact(4);
            let mut ui = xi.chunks_exact(4);
            for (((p, q), u), v) in (&mut ar).zip(&mut ai).zip(&mut ur).zip(&mut ui) {
                for l in 0..4 {
                    sr[l] += p[l] * u[l] - q[l] * v[l];
                    si[l] += p[l] * v[l] + q[l] * u[l];
                }
            }
            let mut r = (sr[0] + sr[1]) + (sr[2] + sr[3]);
            let mut m = (si[0] + si[1]) + (si[2] + si[3]);
            for (((p, q), u), v) in ar.remainder().iter().zip(ai.remainder()).zip(ur.remainder()).zip(ui.remainder()) {
                r += p * u - q * v;
                m += p * v + q * u;
            }
            out.re[i] = r;
            out.im[i] = m;
        }
    }
}

// Padé coefficients and 1-norm thresholds for scaling and squaring
// (Higham 2005).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with Padé approximants.
pub fn expm(a: MatRef<'_, c64>) -> CMat {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = norm_one(a);
    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(a, coeffs);
        }
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled_a = scaled(a, c64::new(0.5f64.powi(squarings), 0.0));
    let mut r = pade13(scaled_a.as_ref());
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

fn pade_low(a: MatRef<'_, c64>, b: &[f64]) -> CMat {
    let n = a.nrows();
    let ident = CMat::identity(n, n);
    let a2 = a * a;
    // powers[k] = A^(2k)
    let mut powers = vec![ident.clone(), a2.clone()];
    while powers.len() * 2 < b.len() {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = CMat::zeros(n, n);
    let mut v = CMat::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k < b.len() {
            add_scaled(&mut v, p.as_ref(), c64::new(b[2 * k], 0.0));
        }
        if 2 * k + 1 < b.len() {
            add_scaled(&mut u_inner, p.as_ref(), c64::new(b[2 * k + 1], 0.0));
        }
    }
    let u = a * &u_inner;
    solve_pade(&u, &v)
}

fn pade13(a: MatRef<'_, c64>) -> CMat {
    let b = &PADE13;
    let n = a.nrows();
    let ident = CMat::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let c = |x: f64| c64::new(x, 0.0);

    let mut inner = scaled(a6.as_ref(), c(b[13]));
    add_scaled(&mut inner, a4.as_ref(), c(b[11]));
    add_scaled(&mut inner, a2.as_ref(), c(b[9]));
    let mut u_inner = &a6 * &inner;
    add_scaled(&mut u_inner, a6.as_ref(), c(b[7]));
    add_scaled(&mut u_inner, a4.as_ref(), c(b[5]));
    add_scaled(&mut u_inner, a2.as_ref(), c(b[3]));
    add_scaled(&mut u_inner, ident.as_ref(), c(b[1]));
    let u = a * &u_inner;

    let mut inner = scaled(a6.as_ref(), c(b[12]));
    add_scaled(&mut inner, a4.as_ref(), c(b[10]));
    add_scaled(&mut inner, a2.as_ref(), c(b[8]));
    let mut v = &a6 * &inner;
    add_scaled(&mut v, a6.as_ref(), c(b[6]));
    add_scaled(&mut v, a4.as_ref(), c(b[4]));
    add_scaled(&mut v, a2.as_ref(), c(b[2]));
    add_scaled(&mut v, ident.as_ref(), c(b[0]));
    solve_pade(&u, &v)
}

fn solve_pade(u: &CMat, v: &CMat) -> CMat {
    let p = v + u;
    let q = v - u;
    q.partial_piv_lu().solve(&p)
}
