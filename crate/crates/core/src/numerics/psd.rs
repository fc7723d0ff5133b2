//! Small PSD-constrained programs solved by ADMM.
//!
//! Problem form: minimize `c·x` subject to `A x = b` and
//! `F_j(x) = C_j + Σ_i x_i F_ji ⪰ 0` for every block `j`. The iteration
//! alternates a KKT solve on the affine part with an eigenvalue-clamping
//! projection onto the PSD cone. The returned point is rechecked directly.

use log::debug;
use nalgebra::{Complex, DMatrix, DVector};

use super::eigen::{eig_sym, psd_project, CMatrix};
use super::NumericsError;
use crate::cancel::CancelToken;

/// One PSD constraint `constant + Σ x_var * coeff ⪰ 0`.
#[derive(Debug, Clone)]
pub struct PsdBlock {
    pub constant: CMatrix,
    pub coeffs: Vec<(usize, CMatrix)>,
}

impl PsdBlock {
    pub fn new(constant: CMatrix) -> Self {
        Self {
            constant,
            coeffs: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn add_term(&mut self, var: usize, coeff: CMatrix) {
        self.coeffs.push((var, coeff));
    }

    pub fn evaluate(&self, x: &[f64]) -> CMatrix {
        let mut m = self.constant.clone();
        for (var, coeff) in &self.coeffs {
            if x[*var] != 0.0 {
                m += coeff * Complex::new(x[*var], 0.0);
            }
        }
        m
    }
}

/// Minimization program over real variables with PSD block constraints.
#[derive(Debug, Clone)]
pub struct PsdProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub blocks: Vec<PsdBlock>,
}

impl PsdProgram {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            objective: vec![0.0; n_vars],
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            blocks: Vec::new(),
        }
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
    }

    pub fn add_block(&mut self, block: PsdBlock) {
        self.blocks.push(block);
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    fn validate(&self, max_dim: usize) -> Result<(), NumericsError> {
        let n = self.n_vars;
        if self.objective.len() != n {
            return Err(NumericsError::DimensionMismatch("objective length".into()));
        }
        if self.a_eq.len() != self.b_eq.len() || self.a_eq.iter().any(|r| r.len() != n) {
            return Err(NumericsError::DimensionMismatch("equality rows".into()));
        }
        for b in &self.blocks {
            let d = b.dim();
            if b.constant.ncols() != d {
                return Err(NumericsError::DimensionMismatch("block constant not square".into()));
            }
            if d > max_dim {
                return Err(NumericsError::TooLarge(format!("block of dimension {d} exceeds {max_dim}")));
            }
            for (var, coeff) in &b.coeffs {
                if *var >= n || coeff.nrows() != d || coeff.ncols() != d {
                    return Err(NumericsError::DimensionMismatch("block coefficient".into()));
                }
            }
        }
        Ok(())
    }

    /// Most negative eigenvalue over all blocks, reported as a nonnegative violation.
    pub fn psd_residual(&self, x: &[f64]) -> Result<f64, NumericsError> {
        let mut worst = 0.0f64;
        for b in &self.blocks {
            let m = b.evaluate(x);
            if m.nrows() == 0 {
                continue;
            }
            worst = worst.max(-eig_sym(&super::eigen::hermitian_part(&m))?.min());
        }
        Ok(worst)
    }

    pub fn eq_residual(&self, x: &[f64]) -> f64 {
        self.a_eq
            .iter()
            .zip(&self.b_eq)
            .map(|(row, b)| (row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Hermitian `d×d` matrices as `d²` real parameters: diagonal entries, then
/// real and imaginary parts of each strictly upper entry.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut m = CMatrix::zeros(d, d);
        m[(i, i)] = Complex::new(1.0, 0.0);
        basis.push(m);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut re = CMatrix::zeros(d, d);
            re[(i, j)] = Complex::new(1.0, 0.0);
            re[(j, i)] = Complex::new(1.0, 0.0);
            basis.push(re);
            let mut im = CMatrix::zeros(d, d);
            im[(i, j)] = Complex::new(0.0, 1.0);
            im[(j, i)] = Complex::new(0.0, -1.0);
            basis.push(im);
        }
    }
    basis
}

pub fn hermitian_from_params(d: usize, params: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    let mut k = d;
    for i in 0..d {
        m[(i, i)] = Complex::new(params[i], 0.0);
    }
    for i in 0..d {
        for j in i + 1..d {
            let z = Complex::new(params[k], params[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

pub fn hermitian_to_params(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut p: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
    for i in 0..d {
        for j in i + 1..d {
            p.push(m[(i, j)].re);
            p.push(m[(i, j)].im);
        }
    }
    p
}

#[derive(Debug, Clone)]
pub struct PsdOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub max_dim: usize,
    pub cancel: CancelToken,
}

impl Default for PsdOptions {
    fn default() -> Self {
        Self {
            max_iter: 50_000,
            tol: 1e-7,
            max_dim: 64,
            cancel: CancelToken::global(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PsdSolution {
    pub value: f64,
    pub point: Vec<f64>,
    pub feasibility_residual: f64,
    pub psd_residual: f64,
    pub eq_residual: f64,
    pub iterations: usize,
}

/// Stacked real vectorization of all blocks.
struct Stacked {
    offsets: Vec<usize>,
    dims: Vec<usize>,
    len: usize,
}

impl Stacked {
    fn new(blocks: &[PsdBlock]) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dims = Vec::with_capacity(blocks.len());
        let mut len = 0;
        for b in blocks {
            offsets.push(len);
            dims.push(b.dim());
            len += 2 * b.dim() * b.dim();
        }
        Self { offsets, dims, len }
    }

    fn write(&self, j: usize, m: &CMatrix, out: &mut DVector<f64>) {
        let d = self.dims[j];
        let mut k = self.offsets[j];
        for r in 0..d {
            for c in 0..d {
                out[k] = m[(r, c)].re;
                out[k + 1] = m[(r, c)].im;
                k += 2;
            }
        }
    }

    fn read(&self, j: usize, v: &DVector<f64>) -> CMatrix {
        let d = self.dims[j];
        let off = self.offsets[j];
        CMatrix::from_fn(d, d, |r, c| {
            let k = off + 2 * (r * d + c);
            Complex::new(v[k], v[k + 1])
        })
    }

    fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.len);
        for j in 0..self.dims.len() {
            let p = psd_project(&self.read(j, v));
            self.write(j, &p, &mut out);
        }
        out
    }
}

struct Kkt {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

fn factor_kkt(
    mtm: &DMatrix<f64>,
    a: &DMatrix<f64>,
    rho: f64,
    sigma: f64,
) -> Result<Kkt, NumericsError> {
    let n = mtm.nrows();
    let m = a.nrows();
    let mut k = DMatrix::<f64>::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = rho * mtm[(i, j)];
        }
        k[(i, i)] += sigma;
    }
    for r in 0..m {
        for c in 0..n {
            k[(n + r, c)] = a[(r, c)];
            k[(c, n + r)] = a[(r, c)];
        }
        k[(n + r, n + r)] = -1e-10;
    }
    let lu = k.lu();
    if !lu.is_invertible() {
        return Err(NumericsError::Singular);
    }
    Ok(Kkt { lu, n })
}

impl Kkt {
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let x = self.lu.solve(rhs).expect("factor checked invertible");
        x.rows(0, self.n).into_owned()
    }
}

/// Solve a small PSD program. Fails with `NoConvergence` if the residuals
/// or the independent recheck stay above `tol` after `max_iter` iterations.
pub fn solve_psd_program(
    prog: &PsdProgram,
    opts: &PsdOptions,
) -> Result<PsdSolution, NumericsError> {
    prog.validate(opts.max_dim)?;
    let n = prog.n_vars;
    let st = Stacked::new(&prog.blocks);

    let mut f0 = DVector::<f64>::zeros(st.len);
    let mut mm = DMatrix::<f64>::zeros(st.len, n);
    let mut col = DVector::<f64>::zeros(st.len);
    for (j, b) in prog.blocks.iter().enumerate() {
        st.write(j, &b.constant, &mut f0);
        for (var, coeff) in &b.coeffs {
            col.fill(0.0);
            st.write(j, coeff, &mut col);
            let d = b.dim();
            let off = st.offsets[j];
            for k in off..off + 2 * d * d {
                mm[(k, *var)] += col[k];
            }
        }
    }
    let a = DMatrix::<f64>::from_fn(prog.a_eq.len(), n, |r, c| prog.a_eq[r][c]);
    let b = DVector::<f64>::from_vec(prog.b_eq.clone());
    let c = DVector::<f64>::from_vec(prog.objective.clone());
    let mtm = mm.transpose() * &mm;

    let sigma = 1e-6;
    let alpha = 1.6;
    let mut rho = 1.0;
    let mut kkt = factor_kkt(&mtm, &a, rho, sigma)?;

    let mut x = DVector::<f64>::zeros(n);
    let mut z = st.project(&f0);
    let mut u = DVector::<f64>::zeros(st.len);
    let m_eq = a.nrows();
    let tol = opts.tol;
    let inner = tol * 1e-2;

    for it in 1..=opts.max_iter {
        if opts.cancel.is_cancelled() {
            return Err(NumericsError::Cancelled);
        }
        let target = &z - &u - &f0;
        let top = mm.transpose() * target * rho - &c + &x * sigma;
        let mut rhs = DVector::<f64>::zeros(n + m_eq);
        rhs.rows_mut(0, n).copy_from(&top);
        rhs.rows_mut(n, m_eq).copy_from(&b);
        x = kkt.solve(&rhs);

        let fx = &mm * &x + &f0;
        let h = &fx * alpha + &z * (1.0 - alpha);
        let z_prev = z.clone();
        z = st.project(&(&h + &u));
        u += &h - &z;

        if it % 10 == 0 || it == opts.max_iter {
            let r = (&fx - &z).norm();
            let s = rho * (mm.transpose() * (&z - &z_prev)).norm();
            let scale_p = fx.norm().max(z.norm()).max(1.0);
            let scale_d = (mm.transpose() * &u * rho).norm().max(c.norm()).max(1.0);
            if r <= inner * scale_p && s <= inner * scale_d {
                let point: Vec<f64> = x.iter().copied().collect();
                let psd_residual = prog.psd_residual(&point)?;
                let eq_residual = prog.eq_residual(&point);
                if psd_residual <= tol && eq_residual <= tol {
                    debug!("psd program converged after {it} iterations");
                    return Ok(PsdSolution {
                        value: prog.objective_at(&point),
                        feasibility_residual: psd_residual.max(eq_residual),
                        point,
                        psd_residual,
                        eq_residual,
                        iterations: it,
                    });
                }
            }
            if it == opts.max_iter {
                return Err(NumericsError::NoConvergence {
                    iterations: it,
                    primal: r,
                    dual: s,
                });
            }
            if it % 50 == 0 {
                let new_rho = if r > 10.0 * s / scale_d * scale_p {
                    rho * 2.0
                } else if s / scale_d * scale_p > 10.0 * r {
                    rho / 2.0
                } else {
                    rho
                };
                if new_rho != rho && (1e-6..=1e6).contains(&new_rho) {
                    u *= rho / new_rho;
                    rho = new_rho;
                    kkt = factor_kkt(&mtm, &a, rho, sigma)?;
                }
            }
        }
    }
    unreachable!("loop returns at max_iter")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigen::{from_real, nuclear_norm_hermitian};
    use nalgebra::DMatrix;

    /// minimize tr Δ s.t. Δ ⪰ X, Δ ⪰ -X.
    fn nuclear_program(x: &CMatrix) -> PsdProgram {
        let d = x.nrows();
        let basis = hermitian_basis(d);
        let mut prog = PsdProgram::new(d * d);
        for i in 0..d {
            prog.objective[i] = 1.0;
        }
        for sign in [-1.0, 1.0] {
            let mut block = PsdBlock::new(x * Complex::new(sign, 0.0));
            for (k, bm) in basis.iter().enumerate() {
                block.add_term(k, bm.clone());
            }
            prog.add_block(block);
        }
        prog
    }

    #[test]
    fn diag_nuclear_norm() {
        let x = from_real(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        let sol = solve_psd_program(&nuclear_program(&x), &PsdOptions::default()).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-6, "{}", sol.value);
        let zero = CMatrix::zeros(2, 2);
        let sol = solve_psd_program(&nuclear_program(&zero), &PsdOptions::default()).unwrap();
        assert!(sol.value.abs() < 1e-6);
    }

    #[test]
    fn complex_nuclear_norm() {
        let x = CMatrix::from_row_slice(
            3,
            3,
            &[
                Complex::new(1.0, 0.0),
                Complex::new(0.5, 0.3),
                Complex::new(-0.2, 0.1),
                Complex::new(0.5, -0.3),
                Complex::new(-0.7, 0.0),
                Complex::new(0.0, 0.4),
                Complex::new(-0.2, -0.1),
                Complex::new(0.0, -0.4),
                Complex::new(0.1, 0.0),
            ],
        );
        let opts = PsdOptions {
            tol: 1e-9,
            ..PsdOptions::default()
        };
        let sol = solve_psd_program(&nuclear_program(&x), &opts).unwrap();
        let expect = nuclear_norm_hermitian(&x).unwrap();
        assert!((sol.value - expect).abs() < 1e-6, "{} vs {expect}", sol.value);
    }

    #[test]
    fn equality_constraints_hold() {
        // minimize -x0 s.t. x0 + x1 = 1, [[x0]] ⪰ 0, [[x1]] ⪰ 0 -> x0 = 1
        let mut prog = PsdProgram::new(2);
        prog.objective = vec![-1.0, 0.0];
        prog.add_eq(vec![1.0, 1.0], 1.0);
        for v in 0..2 {
            let mut b = PsdBlock::new(CMatrix::zeros(1, 1));
            b.add_term(v, CMatrix::identity(1, 1));
            prog.add_block(b);
        }
        let sol = solve_psd_program(&prog, &PsdOptions::default()).unwrap();
        assert!((sol.value + 1.0).abs() < 1e-6);
        assert!(sol.eq_residual < 1e-7);
    }

    #[test]
    fn infeasible_program_does_not_converge() {
        // x ⪰ 0 and -1 - x ⪰ 0
        let mut prog = PsdProgram::new(1);
        let mut b1 = PsdBlock::new(CMatrix::zeros(1, 1));
        b1.add_term(0, CMatrix::identity(1, 1));
        let mut b2 = PsdBlock::new(-CMatrix::identity(1, 1));
        b2.add_term(0, -CMatrix::identity(1, 1));
        prog.add_block(b1);
        prog.add_block(b2);
        let opts = PsdOptions {
            max_iter: 2000,
            ..PsdOptions::default()
        };
        assert!(matches!(
            solve_psd_program(&prog, &opts),
            Err(NumericsError::NoConvergence { .. })
        ));
    }

    #[test]
    fn hermitian_params_round_trip() {
        let x = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(1.0, 0.0),
                Complex::new(2.0, -3.0),
                Complex::new(2.0, 3.0),
                Complex::new(4.0, 0.0),
            ],
        );
        let p = hermitian_to_params(&x);
        assert_eq!(hermitian_from_params(2, &p), x);
        let basis = hermitian_basis(2);
        let rebuilt = basis
            .iter()
            .zip(&p)
            .fold(CMatrix::zeros(2, 2), |acc, (b, v)| acc + b * Complex::new(*v, 0.0));
        assert_eq!(rebuilt, x);
    }
}
