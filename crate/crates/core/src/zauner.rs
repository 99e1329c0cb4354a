//! The metaplectic unitary of a symplectic matrix over Z_L and the star
//! window: an eigenvector of the unitary attached to the Zauner matrix.
//!
//! Entry `(u, v)` of `U_G` is
//! `exp(i theta) / sqrt(L) * tau^(beta^-1 (alpha v^2 - 2 u v + delta u^2))`
//! with `tau = -exp(i pi / L)`. Exponents are reduced modulo `2L`, the order
//! of `tau` (which drops to `L` for odd `L`).
//!
//! Two equivalent evaluation routes exist: the row formula (used for dense
//! materialization and spot checks) and a chirp/FFT factorization
//! `U x = post * FFT(pre * x)[beta^-1 u]`, which is exact because the
//! exponent splits into integer parts.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};
use crate::gabor::{WindowKind, WindowVector};
use crate::modring::{is_admissible_length, mod_inverse, AdmissibilityMode, Residue};
use crate::scalar::Real;

/// Largest `L` for which the star window computation materializes `U_Z`.
pub const DENSE_LIMIT: usize = 2000;

/// Largest `L` accepted by [`metaplectic`] (dense, `L^2` entries).
pub const MATERIALIZE_LIMIT: usize = 3000;

/// `[[alpha, beta], [gamma, delta]]` over Z_L with unit determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymplecticMatrix {
    alpha: Residue,
    beta: Residue,
    gamma: Residue,
    delta: Residue,
}

impl SymplecticMatrix {
    pub fn new(alpha: i64, beta: i64, gamma: i64, delta: i64, modulus: u64) -> Result<Self> {
        let g = SymplecticMatrix {
            alpha: Residue::new(alpha, modulus),
            beta: Residue::new(beta, modulus),
            gamma: Residue::new(gamma, modulus),
            delta: Residue::new(delta, modulus),
        };
        let det = g.determinant();
        if det.value() != 1 % modulus {
            return Err(Error::InvalidParameters(format!(
                "determinant of ({alpha},{beta},{gamma},{delta}) is {} mod {modulus}, not 1",
                det.value()
            )));
        }
        Ok(g)
    }

    /// The Zauner matrix `[[0, -1], [1, -1]]`.
    pub fn zauner(len: usize) -> Result<Self> {
        if len < 3 {
            return Err(Error::InvalidParameters(format!(
                "Zauner matrix needs L >= 3, got {len}"
            )));
        }
        let l = len as i64;
        Self::new(0, l - 1, 1, l - 1, len as u64)
    }

    pub fn modulus(&self) -> u64 {
        self.alpha.modulus()
    }

    /// `(alpha, beta, gamma, delta)` as least residues.
    pub fn entries(&self) -> (u64, u64, u64, u64) {
        (
            self.alpha.value(),
            self.beta.value(),
            self.gamma.value(),
            self.delta.value(),
        )
    }

    pub fn determinant(&self) -> Residue {
        self.alpha * self.delta - self.beta * self.gamma
    }

    /// Matrix product `self * other` over Z_L.
    pub fn compose(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix {
            alpha: self.alpha * other.alpha + self.beta * other.gamma,
            beta: self.alpha * other.beta + self.beta * other.delta,
            gamma: self.gamma * other.alpha + self.delta * other.gamma,
            delta: self.gamma * other.beta + self.delta * other.delta,
        }
    }

    pub fn is_identity(&self) -> bool {
        let one = 1 % self.modulus();
        self.entries() == (one, 0, 0, one)
    }
}

impl fmt::Display for SymplecticMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, c, d) = self.entries();
        write!(f, "[[{a}, {b}], [{c}, {d}]] mod {}", self.modulus())
    }
}

/// Something that applies an `L x L` unitary to complex vectors.
pub trait UnitaryAction<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[Complex<T>], out: &mut [Complex<T>]);

    fn apply(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.dim()];
        self.apply_into(x, &mut out);
        out
    }
}

/// Closed-form description of `U_G`; evaluates entries, rows, or the fast action.
#[derive(Clone)]
pub struct Metaplectic<T: Real> {
    source: SymplecticMatrix,
    theta: T,
    beta_inv: u64,
    /// `tau^k` for `k in 0..2L`.
    tau_powers: Vec<Complex<T>>,
    scale: Complex<T>,
}

impl<T: Real> fmt::Debug for Metaplectic<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Metaplectic")
            .field("source", &self.source)
            .field("theta", &self.theta)
            .finish()
    }
}

impl<T: Real> Metaplectic<T> {
    pub fn new(source: SymplecticMatrix, theta: T) -> Result<Self> {
        let beta_inv = mod_inverse(source.beta)?.value();
        let len = source.modulus() as usize;
        let two_l = 2 * len as u64;
        let lt = T::from_usize_lossy(len);
        // tau = exp(i pi (L + 1) / L), so tau^k = exp(i pi (k (L+1) mod 2L) / L)
        let tau_powers = (0..two_l)
            .map(|k| {
                let r = (k as u128 * (len as u128 + 1) % two_l as u128) as usize;
                Complex::from_polar(T::one(), T::PI() * T::from_usize_lossy(r) / lt)
            })
            .collect();
        let scale = Complex::from_polar(T::one() / lt.sqrt(), theta);
        Ok(Metaplectic {
            source,
            theta,
            beta_inv,
            tau_powers,
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.source.modulus() as usize
    }

    pub fn source(&self) -> SymplecticMatrix {
        self.source
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// Reduced exponent of `tau` at `(u, v)`.
    pub fn exponent(&self, u: usize, v: usize) -> u64 {
        let (alpha, _, _, delta) = self.source.entries();
        let m = 2 * self.source.modulus() as i128;
        let (u, v) = (u as i128, v as i128);
        let quad = (alpha as i128 * (v * v % m) - 2 * (u * v % m) + delta as i128 * (u * u % m))
            .rem_euclid(m);
        (self.beta_inv as i128 * quad).rem_euclid(m) as u64
    }

    pub fn entry(&self, u: usize, v: usize) -> Complex<T> {
        self.scale * self.tau_powers[self.exponent(u, v) as usize]
    }

    /// `(U x)[u]` straight from the row formula.
    pub fn apply_row(&self, u: usize, x: &[Complex<T>]) -> Complex<T> {
        let acc = x
            .iter()
            .enumerate()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (v, &xv)| {
                acc + self.tau_powers[self.exponent(u, v) as usize] * xv
            });
        self.scale * acc
    }

    pub fn materialize(&self) -> Result<MetaplecticOperator<T>> {
        let len = self.dim();
        if len > MATERIALIZE_LIMIT {
            return Err(Error::TooLarge {
                what: "dense metaplectic dimension",
                size: len as u128,
                limit: MATERIALIZE_LIMIT as u128,
            });
        }
        let mut entries = Vec::with_capacity(len * len);
        for u in 0..len {
            for v in 0..len {
                entries.push(self.entry(u, v));
            }
        }
        Ok(MetaplecticOperator {
            len,
            entries,
            theta: self.theta,
            source: self.source,
        })
    }

    /// `O(L log L)` matrix-free action.
    pub fn fast(&self) -> FastMetaplectic<T> {
        let len = self.dim();
        let (alpha, _, _, delta) = self.source.entries();
        let m = 2 * len as u128;
        let binv = self.beta_inv as u128;
        let chirp = |coef: u64, k: usize| {
            let e = binv * (coef as u128 * ((k as u128 * k as u128) % m) % m) % m;
            self.tau_powers[e as usize]
        };
        let pre = (0..len).map(|v| chirp(alpha, v)).collect();
        let post = (0..len).map(|u| self.scale * chirp(delta, u)).collect();
        let gather = (0..len)
            .map(|u| ((self.beta_inv as u128 * u as u128) % len as u128) as usize)
            .collect();
        FastMetaplectic {
            pre,
            post,
            gather,
            fft: FftPlanner::new().plan_fft_forward(len),
        }
    }
}

/// `U x = post .* FFT(pre .* x)[gather]`.
#[derive(Clone)]
pub struct FastMetaplectic<T: Real> {
    pre: Vec<Complex<T>>,
    post: Vec<Complex<T>>,
    gather: Vec<usize>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> UnitaryAction<T> for FastMetaplectic<T> {
    fn dim(&self) -> usize {
        self.pre.len()
    }

    fn apply_into(&self, x: &[Complex<T>], out: &mut [Complex<T>]) {
        let mut buf: Vec<Complex<T>> = x.iter().zip(&self.pre).map(|(&a, &b)| a * b).collect();
        self.fft.process(&mut buf);
        for ((o, &p), &k) in out.iter_mut().zip(&self.post).zip(&self.gather) {
            *o = p * buf[k];
        }
    }
}

/// Dense `U_G`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaplecticOperator<T> {
    len: usize,
    entries: Vec<Complex<T>>,
    theta: T,
    source: SymplecticMatrix,
}

impl<T: Real> MetaplecticOperator<T> {
    pub fn dim(&self) -> usize {
        self.len
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn source(&self) -> SymplecticMatrix {
        self.source
    }

    pub fn entry(&self, u: usize, v: usize) -> Complex<T> {
        self.entries[u * self.len + v]
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    /// Dense product `self * other`.
    pub fn matmul(&self, other: &MetaplecticOperator<T>) -> Result<Vec<Complex<T>>> {
        check_len("metaplectic product", self.len, other.len)?;
        let n = self.len;
        let mut out = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                let row = &other.entries[k * n..(k + 1) * n];
                for (o, &b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    /// `max |(U^H U - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> T {
        let n = self.len;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..n {
                    acc = acc + self.entries[k * n + i].conj() * self.entries[k * n + j];
                }
                if i == j {
                    acc = acc - Complex::new(T::one(), T::zero());
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

impl<T: Real> UnitaryAction<T> for MetaplecticOperator<T> {
    fn dim(&self) -> usize {
        self.len
    }

    fn apply_into(&self, x: &[Complex<T>], out: &mut [Complex<T>]) {
        let n = self.len;
        for (u, o) in out.iter_mut().enumerate() {
            *o = self.entries[u * n..(u + 1) * n]
                .iter()
                .zip(x)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| {
                    acc + a * b
                });
        }
    }
}

/// Dense `U_G` for a symplectic matrix and phase.
pub fn metaplectic<T: Real>(g: SymplecticMatrix, theta: T) -> Result<MetaplecticOperator<T>> {
    Metaplectic::new(g, theta)?.materialize()
}

/// Unit-norm eigenvector of the Zauner unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct StarWindow<T> {
    pub vector: WindowVector<T>,
    pub eigenvalue: Complex<T>,
    /// `||U_Z g - lambda g||_2`.
    pub residual: T,
    /// The scalar `c` with `U_Z^3 = c I`.
    pub cube_scalar: Complex<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarWindowConfig<T> {
    pub theta: T,
    pub seed: u64,
    pub tolerance: T,
    /// Materialize `U_Z` at or below this length; apply it matrix-free above.
    pub dense_limit: usize,
}

impl<T: Real> Default for StarWindowConfig<T> {
    fn default() -> Self {
        StarWindowConfig {
            theta: T::zero(),
            seed: 0,
            tolerance: T::EIGEN_RESIDUAL_TOL,
            dense_limit: DENSE_LIMIT,
        }
    }
}

fn vec_norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
}

/// `U^3 e_0`, first entry.
pub fn cube_scalar<T: Real>(op: &impl UnitaryAction<T>) -> Complex<T> {
    let n = op.dim();
    let mut e0 = vec![Complex::new(T::zero(), T::zero()); n];
    e0[0] = Complex::new(T::one(), T::zero());
    let u1 = op.apply(&e0);
    let u2 = op.apply(&u1);
    op.apply(&u2)[0]
}

/// Projects onto the `lambda`-eigenspace of an order-3 (up to phase) unitary:
/// `(v + conj(lambda) U v + conj(lambda)^2 U^2 v) / 3`.
fn project<T: Real>(
    op: &impl UnitaryAction<T>,
    lambda: Complex<T>,
    v: &[Complex<T>],
) -> Vec<Complex<T>> {
    let uv = op.apply(v);
    let uuv = op.apply(&uv);
    let lc = lambda.conj();
    let lc2 = lc * lc;
    let three = T::lit(3.0);
    v.iter()
        .zip(&uv)
        .zip(&uuv)
        .map(|((&a, &b), &c)| (a + lc * b + lc2 * c) / three)
        .collect()
}

fn residual<T: Real>(op: &impl UnitaryAction<T>, lambda: Complex<T>, g: &[Complex<T>]) -> T {
    let ug = op.apply(g);
    ug.iter()
        .zip(g)
        .map(|(&a, &b)| (a - lambda * b).norm_sqr())
        .sum::<T>()
        .sqrt()
}

/// Star window for length `L` with phase `theta` and a seeded start vector.
pub fn star_window<T: Real>(len: usize, theta: T, seed: u64) -> Result<StarWindow<T>> {
    star_window_with(
        len,
        &StarWindowConfig {
            theta,
            seed,
            ..StarWindowConfig::default()
        },
    )
}

/// Star window computation.
///
/// Uses `U_Z^3 = c I`: for each cube root `lambda` of `c` (principal root
/// first) the spectral projector is applied to a seeded Gaussian vector, and
/// the first non-negligible projection is normalized and certified by its
/// residual. Falls back to a dense Hermitian eigensolve of
/// `conj(lambda) U + lambda U^H`, whose top eigenspace (eigenvalue 2) is the
/// `lambda`-eigenspace of `U`.
pub fn star_window_with<T: Real>(len: usize, cfg: &StarWindowConfig<T>) -> Result<StarWindow<T>> {
    let mode = AdmissibilityMode::Paper;
    if len < 3 || !is_admissible_length(len as u64, mode)?.0 {
        return Err(Error::NotAdmissible {
            n: len as u64,
            mode,
        });
    }
    let formula = Metaplectic::new(SymplecticMatrix::zauner(len)?, cfg.theta)?;
    if len <= cfg.dense_limit {
        let dense = formula.materialize()?;
        extract_eigenvector(&dense, len, cfg)
    } else {
        extract_eigenvector(&formula.fast(), len, cfg)
    }
}

fn extract_eigenvector<T: Real>(
    op: &impl UnitaryAction<T>,
    len: usize,
    cfg: &StarWindowConfig<T>,
) -> Result<StarWindow<T>> {
    let c = cube_scalar(op);
    let root = Complex::from_polar(T::one(), c.arg() / T::lit(3.0));
    let omega = Complex::from_polar(T::one(), T::TAU() / T::lit(3.0));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start: Vec<Complex<T>> = (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    let start_norm = vec_norm(&start);

    let mut best = T::infinity();
    let mut lambda = root;
    for _ in 0..3 {
        let mut p = project(op, lambda, &start);
        let pn = vec_norm(&p);
        if pn > T::lit(1e-6) * start_norm {
            p.iter_mut().for_each(|z| *z = *z / pn);
            let mut r = residual(op, lambda, &p);
            // re-projecting damps leftovers from other eigenspaces
            for _ in 0..3 {
                if r <= cfg.tolerance {
                    break;
                }
                p = project(op, lambda, &p);
                let n = vec_norm(&p);
                p.iter_mut().for_each(|z| *z = *z / n);
                r = residual(op, lambda, &p);
            }
            if r <= cfg.tolerance {
                return Ok(StarWindow {
                    vector: WindowVector::new(p, WindowKind::Star)?,
                    eigenvalue: lambda,
                    residual: r,
                    cube_scalar: c,
                });
            }
            best = best.min(r);
        }
        lambda = lambda * omega;
    }

    if len <= cfg.dense_limit {
        if let Some(found) = hermitian_fallback(len, cfg, root, c)? {
            return Ok(found);
        }
    }
    Err(Error::EigensolveFailed {
        residual: best.to_f64_lossy(),
        tolerance: cfg.tolerance.to_f64_lossy(),
    })
}

fn hermitian_fallback<T: Real>(
    len: usize,
    cfg: &StarWindowConfig<T>,
    root: Complex<T>,
    c: Complex<T>,
) -> Result<Option<StarWindow<T>>> {
    let formula =
        Metaplectic::<f64>::new(SymplecticMatrix::zauner(len)?, cfg.theta.to_f64_lossy())?;
    let dense = formula.materialize()?;
    let u = DMatrix::from_fn(len, len, |i, j| dense.entry(i, j));
    let omega = Complex::from_polar(1.0, std::f64::consts::TAU / 3.0);
    let mut lambda = Complex::new(root.re.to_f64_lossy(), root.im.to_f64_lossy());
    for _ in 0..3 {
        let h = u.map(|z| z * lambda.conj()) + u.adjoint().map(|z| z * lambda);
        let eig = h.symmetric_eigen();
        let (top, _) =
            eig.eigenvalues
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
                );
        let col = eig.eigenvectors.column(top);
        let p: Vec<Complex<T>> = col
            .iter()
            .map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
            .collect();
        let lam_t = Complex::new(T::lit(lambda.re), T::lit(lambda.im));
        let op = Metaplectic::new(SymplecticMatrix::zauner(len)?, cfg.theta)?.materialize()?;
        let n = vec_norm(&p);
        let p: Vec<Complex<T>> = p.into_iter().map(|z| z / n).collect();
        let r = residual(&op, lam_t, &p);
        if r <= cfg.tolerance {
            return Ok(Some(StarWindow {
                vector: WindowVector::new(p, WindowKind::Star)?,
                eigenvalue: lam_t,
                residual: r,
                cube_scalar: c,
            }));
        }
        lambda *= omega;
    }
    Ok(None)
}
