//! Middle matrices and truncated plurisubharmonicity certificates.
//!
//! `C⁺` is indexed by pairs `(γ, a)` with `γ` an analytic word of length
//! `1..=N` and `a` a coefficient basis index; its entries are
//! `C⁺[(γ,a),(β,b)] = c_{γ*β}[a,b]`. `C⁻` is the same over coanalytic words.
//! Both are laid out word-major in graded-lex order, so the level-`N` matrix is
//! a leading principal submatrix of the level-`N+1` matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::complex_hessian;
use crate::calculus::eval_form;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, ZERO};
use crate::series::NCSeries;
use crate::tuple::MatrixTuple;
use crate::word::{Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramKind {
    Plus,
    Minus,
}

impl GramKind {
    pub fn label(self) -> &'static str {
        match self {
            GramKind::Plus => "+",
            GramKind::Minus => "-",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MiddleMatrix {
    pub kind: GramKind,
    pub index: Vec<(Word, usize)>,
    pub gram: CMat,
    /// `‖G − G*‖_F / 2` before symmetrization.
    pub asymmetry: f64,
}

/// Index words for the given kind: analytic for `Plus`, coanalytic for `Minus`.
pub fn index_words(kind: GramKind, d: usize, n: usize) -> Vec<Word> {
    Word::pure_words(d, n, kind == GramKind::Minus)
}

pub fn build_middle(s: &NCSeries, kind: GramKind, n: usize) -> Result<MiddleMatrix> {
    if n == 0 {
        return Err(Error::PreconditionViolated("middle matrix level must be at least 1".into()));
    }
    if s.rows() != s.cols() {
        return Err(Error::DimensionMismatch("middle matrix of a rectangular series".into()));
    }
    if 2 * n > s.maxdeg() {
        return Err(Error::TruncationTooDeep { needed: 2 * n, available: s.maxdeg() });
    }
    let k = s.k();
    let words = index_words(kind, s.nvars(), n);
    let index: Vec<(Word, usize)> = words.iter().flat_map(|w| (0..k).map(move |a| (w.clone(), a))).collect();
    let m = words.len();
    let mut gram = linalg::zeros(m * k, m * k);
    for (p, g) in words.iter().enumerate() {
        let gs = g.involution();
        for (q, b) in words.iter().enumerate() {
            if let Some(coeff) = s.get(&gs.concat(b)) {
                gram.view_mut((p * k, q * k), (k, k)).copy_from(coeff);
            }
        }
    }
    let asymmetry = linalg::asymmetry(&gram);
    let gram = linalg::hermitian_part(&gram);
    Ok(MiddleMatrix { kind, index, gram, asymmetry })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramVerdict {
    pub min_eig: f64,
    pub psd: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramWitness {
    pub kind: GramKind,
    pub words: Vec<String>,
    pub basis: Vec<usize>,
    /// Eigenvector for the smallest eigenvalue, as `[re, im]` pairs.
    pub vector: Vec<[f64; 2]>,
}

impl GramWitness {
    pub fn complex_vector(&self) -> Vec<Complex64> {
        self.vector.iter().map(|v| c(v[0], v[1])).collect()
    }

    /// The witness read as a vector-valued polynomial `Σ x_γ Z^γ`:
    /// one `(word, coefficient vector)` entry per index word.
    pub fn polynomial(&self) -> Vec<(String, Vec<Complex64>)> {
        let x = self.complex_vector();
        let mut out: Vec<(String, Vec<Complex64>)> = Vec::new();
        for (i, w) in self.words.iter().enumerate() {
            match out.last_mut() {
                Some((last, v)) if last == w => v.push(x[i]),
                _ => out.push((w.clone(), vec![x[i]])),
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub cplus: GramVerdict,
    pub cminus: GramVerdict,
    pub witness: Option<GramWitness>,
    pub status: String,
}

impl CertificateReport {
    pub fn certified(&self) -> bool {
        self.cplus.psd && self.cminus.psd
    }
}

fn verdict(m: &MiddleMatrix, tol: f64) -> Result<(GramVerdict, Option<Vec<Complex64>>)> {
    let scale = m.gram.norm();
    if m.asymmetry > 1e-10 * scale.max(1.0) {
        return Err(Error::NotHermitian { asymmetry: m.asymmetry, allowed: 1e-10 * scale.max(1.0) });
    }
    if m.gram.nrows() == 0 {
        return Ok((GramVerdict { min_eig: 0.0, psd: true }, None));
    }
    let r = linalg::psd_check(&m.gram, tol)?;
    Ok((GramVerdict { min_eig: r.min_eigenvalue, psd: r.is_psd() }, r.witness))
}

/// Tests `C⁺` and `C⁻` at level `n`. A failing matrix yields a witness: the
/// eigenvector of its smallest eigenvalue (`C⁺` is examined first).
pub fn psh_certificate(s: &NCSeries, n: usize, tol: f64) -> Result<CertificateReport> {
    let plus = build_middle(s, GramKind::Plus, n)?;
    let minus = build_middle(s, GramKind::Minus, n)?;
    let (vp, wp) = verdict(&plus, tol)?;
    let (vm, wm) = verdict(&minus, tol)?;
    let pick = match (wp, wm) {
        (Some(v), _) => Some((&plus, v)),
        (None, Some(v)) => Some((&minus, v)),
        _ => None,
    };
    let witness = pick.map(|(m, v)| GramWitness {
        kind: m.kind,
        words: m.index.iter().map(|(w, _)| w.to_string()).collect(),
        basis: m.index.iter().map(|(_, a)| *a).collect(),
        vector: linalg::json::vector(&v),
    });
    let status = if witness.is_none() {
        format!("certified up to degree {n}")
    } else {
        format!("not plurisubharmonic: C{} fails at degree {n}", witness.as_ref().unwrap().kind.label())
    };
    Ok(CertificateReport { n, cplus: vp, cminus: vm, witness, status })
}

/// Smallest level `1..=max_n` at which the certificate fails, if any.
pub fn first_failure(s: &NCSeries, max_n: usize, tol: f64) -> Result<Option<CertificateReport>> {
    for n in 1..=max_n {
        if 2 * n > s.maxdeg() {
            break;
        }
        let r = psh_certificate(s, n, tol)?;
        if !r.certified() {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// A point, direction and test vector built from a Gram witness.
#[derive(Clone, Debug)]
pub struct WitnessProbe {
    pub z: MatrixTuple,
    pub h: MatrixTuple,
    pub y: Vec<Complex64>,
    pub t: f64,
}

/// Fock-space realization of a Gram witness.
///
/// On the span `F` of words of length `0..=N`, let `A_i` delete a leading
/// letter `z_i`. For `C⁺` take `Z_i = t·A_i ⊕ 0` and let `H_i` map `F` into
/// the extra coordinate by `t·⟨e_{z_i}, ·⟩`; for `C⁻` use the creation
/// operators `t·A_i*` and the transposed direction. With
/// `y_{rev(γ), a} = x_{(γ,a)} / t^{|γ|}` the quadratic form
/// `y* Δf(Z)[H] y` equals `x* C x + O(t²)`.
pub fn witness_probe(d: usize, k: usize, n: usize, w: &GramWitness, t: f64) -> Result<WitnessProbe> {
    let fock = (0..=n).flat_map(|len| Word::all_of_length(d, len, false)).collect::<Vec<_>>();
    let pos = |word: &Word| fock.binary_search(word).expect("fock word");
    let m = fock.len();
    let dim = m + 1;
    let mut zs = Vec::with_capacity(d);
    let mut hs = Vec::with_capacity(d);
    for i in 0..d {
        let li = Letter::z(i as u16);
        let mut a = linalg::zeros(m, m);
        for (col, word) in fock.iter().enumerate() {
            if word.letters().first() == Some(&li) {
                let rest = Word::new(word.letters()[1..].to_vec());
                a[(pos(&rest), col)] = c(1.0, 0.0);
            }
        }
        let op = match w.kind {
            GramKind::Plus => a,
            GramKind::Minus => a.transpose(),
        };
        let mut z = linalg::zeros(dim, dim);
        z.view_mut((0, 0), (m, m)).copy_from(&op.scale(t));
        let mut h = linalg::zeros(dim, dim);
        let zi = pos(&Word::letter(li));
        match w.kind {
            GramKind::Plus => h[(m, zi)] = c(t, 0.0),
            GramKind::Minus => h[(zi, m)] = c(t, 0.0),
        }
        zs.push(z);
        hs.push(h);
    }
    let x = w.complex_vector();
    let mut y = vec![ZERO; dim * k];
    for (idx, (word, &a)) in w.words.iter().zip(&w.basis).enumerate() {
        let parsed: Word = word.parse()?;
        let plain = Word::new(parsed.letters().iter().rev().map(|l| Letter::z(l.var)).collect());
        let scale = t.powi(parsed.len() as i32);
        y[pos(&plain) * k + a] = x[idx] / scale;
    }
    Ok(WitnessProbe { z: MatrixTuple::new(zs)?, h: MatrixTuple::new(hs)?, y, t })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub t: f64,
    /// `y* Δf(Z)[H] y`.
    pub quadratic: f64,
    /// `x* C x` for the Gram witness.
    pub gram_value: f64,
    pub confirmed: bool,
}

/// Evaluates the Hessian along the decoded witness for decreasing `t` and
/// reports the first scale at which `y* Δf y` is negative and within half of
/// `x* C x`.
pub fn confirm_witness(s: &NCSeries, n: usize, w: &GramWitness) -> Result<WitnessCheck> {
    let hess = complex_hessian(s);
    let x = w.complex_vector();
    let m = build_middle(s, w.kind, n)?;
    let xv = nalgebra::DVector::from_vec(x);
    let gram_value = (xv.adjoint() * &m.gram * &xv)[(0, 0)].re;
    let mut last = None;
    for t in [0.3, 0.1, 0.03, 0.01] {
        let p = witness_probe(s.nvars(), s.k(), n, w, t)?;
        let delta = eval_form(&hess, &p.z, &p.h)?;
        let y = nalgebra::DVector::from_vec(p.y);
        let q = (y.adjoint() * &delta * &y)[(0, 0)].re;
        let confirmed = q < 0.0 && (q - gram_value).abs() <= 0.5 * gram_value.abs();
        let check = WitnessCheck { t, quadratic: q, gram_value, confirmed };
        if confirmed {
            return Ok(check);
        }
        last = Some(check);
    }
    Ok(last.expect("at least one scale"))
}
