use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::Serialize;

use super::{ConstraintKind, HierarchyError, PolynomialProblem};
use crate::linalg::{c, CMatrix};
use crate::moment::{enumerate_indices, MomentSequence, MultiIndex, Polynomial, SequenceMode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockOrigin {
    Moment,
    /// Index into `PolynomialProblem::constraints`.
    Localizing(usize),
    /// Zero-based variables of a hyponormality block.
    HypoBlock(Vec<usize>),
    /// Equality rows exported as a diagonal block (SDPA only).
    Equalities,
    /// Block read from an external file.
    Imported,
}

/// `constant + Σ_i y_i coeffs_i ⪰ 0`, Hermitian in every term.
#[derive(Debug, Clone)]
pub struct AffineBlock {
    pub origin: BlockOrigin,
    pub constant: CMatrix,
    /// Sparse over variables, sorted by variable index.
    pub coeffs: Vec<(usize, CMatrix)>,
}

impl AffineBlock {
    pub fn size(&self) -> usize {
        self.constant.rows()
    }

    pub fn is_real(&self) -> bool {
        let real = |m: &CMatrix| m.as_slice().iter().all(|z| z.im == 0.0);
        real(&self.constant) && self.coeffs.iter().all(|(_, m)| real(m))
    }

    pub fn eval(&self, y: &[f64]) -> CMatrix {
        let mut out = self.constant.clone();
        for (i, a) in &self.coeffs {
            out = &out + &a.scale(c(y[*i], 0.0));
        }
        out
    }
}

/// `Σ coeffs · y = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEquality {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// `min objective·y + objective_constant` subject to every block being PSD
/// and every equality holding. Variables are real and free.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub blocks: Vec<AffineBlock>,
    pub equalities: Vec<LinearEquality>,
}

impl SdpProblem {
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(AffineBlock::size).collect()
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() + self.objective_constant
    }

    pub fn is_real(&self) -> bool {
        self.blocks.iter().all(AffineBlock::is_real)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Re,
    Im,
}

/// Real unknowns of the relaxation and the moments they encode.
///
/// For each pair `α <= β` (graded lex) there is a real part and, when
/// `α ≠ β`, an imaginary part; `y_{β,α}` is the conjugate of `y_{α,β}`.
/// `y_{0,0}` is fixed to 1 and carries no unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationMap {
    pub n: usize,
    pub d: u32,
    pub vars: Vec<(MultiIndex, MultiIndex, Part)>,
    lookup: HashMap<(MultiIndex, MultiIndex), (Option<usize>, Option<usize>)>,
}

/// `constant + Σ coeff · y_var`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Affine {
    pub constant: Complex64,
    pub terms: Vec<(usize, Complex64)>,
}

impl Affine {
    fn add_scaled(&mut self, other: &Affine, s: Complex64) {
        self.constant += other.constant * s;
        for (v, w) in &other.terms {
            match self.terms.iter_mut().find(|(u, _)| u == v) {
                Some((_, x)) => *x += w * s,
                None => self.terms.push((*v, w * s)),
            }
        }
    }
}

impl RelaxationMap {
    pub fn new(n: usize, d: u32) -> Self {
        let idx = enumerate_indices(n, d);
        let mut vars = Vec::new();
        let mut lookup = HashMap::new();
        for (i, a) in idx.iter().enumerate() {
            for b in &idx[i..] {
                if a.is_zero() && b.is_zero() {
                    lookup.insert((a.clone(), b.clone()), (None, None));
                    continue;
                }
                let re = vars.len();
                vars.push((a.clone(), b.clone(), Part::Re));
                let im = (a != b).then(|| {
                    vars.push((a.clone(), b.clone(), Part::Im));
                    vars.len() - 1
                });
                lookup.insert((a.clone(), b.clone()), (Some(re), im));
            }
        }
        Self { n, d, vars, lookup }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// `y_{α,β}` as an affine function of the unknowns.
    pub fn affine(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Result<Affine, HierarchyError> {
        let (key, conj) = if alpha <= beta {
            ((alpha.clone(), beta.clone()), false)
        } else {
            ((beta.clone(), alpha.clone()), true)
        };
        let (re, im) = *self.lookup.get(&key).ok_or_else(|| {
            HierarchyError::Shape(format!("moment ({alpha}; {beta}) exceeds order {}", self.d))
        })?;
        let mut out = Affine::default();
        match re {
            None => out.constant = c(1.0, 0.0),
            Some(r) => out.terms.push((r, c(1.0, 0.0))),
        }
        if let Some(i) = im {
            out.terms.push((i, c(0.0, if conj { -1.0 } else { 1.0 })));
        }
        Ok(out)
    }

    /// Moment sequence of order `d` encoded by `y`; Hermitian by construction.
    pub fn to_sequence(&self, y: &[f64]) -> Result<MomentSequence, HierarchyError> {
        if y.len() != self.vars.len() {
            return Err(HierarchyError::Format(format!(
                "solution has {} entries, expected {}",
                y.len(),
                self.vars.len()
            )));
        }
        let idx = enumerate_indices(self.n, self.d);
        let mut seq = MomentSequence::new(self.n, self.d, SequenceMode::Paired);
        for a in &idx {
            for b in &idx {
                let e = self.affine(a, b)?;
                let v = e.terms.iter().fold(e.constant, |s, (i, w)| s + w * y[*i]);
                seq.insert_pair(a.clone(), b.clone(), v);
            }
        }
        Ok(seq)
    }

    /// Inverse of [`to_sequence`](Self::to_sequence) on Hermitian data.
    pub fn from_sequence(&self, seq: &MomentSequence) -> Result<Vec<f64>, HierarchyError> {
        self.vars
            .iter()
            .map(|(a, b, part)| {
                let v = seq.get(a, b)?;
                Ok(match part {
                    Part::Re => v.re,
                    Part::Im => v.im,
                })
            })
            .collect()
    }
}

/// Options for [`assemble_relaxation_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelaxOptions {
    pub d: u32,
    pub enforce_hyponormality: bool,
    /// Order gap of the enforced blocks: they are built from `M_{d - gap}`
    /// submatrices.
    pub hypo_gap: u32,
}

impl RelaxOptions {
    pub fn new(d: u32) -> Self {
        Self {
            d,
            enforce_hyponormality: false,
            hypo_gap: 1,
        }
    }
}

/// Order-`d` moment relaxation of `p`, with hyponormality blocks at gap 1
/// when `enforce` is set.
pub fn assemble_relaxation(
    p: &PolynomialProblem,
    d: u32,
    enforce: bool,
) -> Result<(SdpProblem, RelaxationMap), HierarchyError> {
    let mut o = RelaxOptions::new(d);
    o.enforce_hyponormality = enforce;
    assemble_relaxation_with(p, &o)
}

pub fn assemble_relaxation_with(
    p: &PolynomialProblem,
    opts: &RelaxOptions,
) -> Result<(SdpProblem, RelaxationMap), HierarchyError> {
    let d = opts.d;
    let need = p.min_order();
    if d < need {
        return Err(HierarchyError::OrderTooSmall { d, required: need });
    }
    let n = p.n;
    let map = RelaxationMap::new(n, d);
    let idx = enumerate_indices(n, d);
    let mut blocks = Vec::new();
    let mut equalities = Vec::new();

    blocks.push(build_block(BlockOrigin::Moment, &idx, |a, b| map.affine(a, b))?);

    for (ci, con) in p.constraints.iter().enumerate() {
        let k = con.half_degree();
        let sub = enumerate_indices(n, d - k);
        let entry = |a: &MultiIndex, b: &MultiIndex| localizing_entry(&map, &con.poly, a, b);
        match con.kind {
            ConstraintKind::Ineq => {
                blocks.push(build_block(BlockOrigin::Localizing(ci), &sub, entry)?);
            }
            ConstraintKind::Eq => {
                for (i, a) in sub.iter().enumerate() {
                    for b in &sub[i..] {
                        let e = entry(a, b)?;
                        push_equalities(&mut equalities, &e, a == b)?;
                    }
                }
            }
        }
    }

    if opts.enforce_hyponormality {
        let gap = opts.hypo_gap.max(1);
        if d < gap {
            return Err(HierarchyError::OrderTooSmall { d, required: gap });
        }
        let pairs: Vec<Vec<usize>> = if n == 1 {
            vec![vec![0]]
        } else {
            (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| vec![i, j]))
                .collect()
        };
        let sub = enumerate_indices(n, d - gap);
        for vars in pairs {
            let mut shifts = vec![MultiIndex::zero(n)];
            shifts.extend(vars.iter().map(|&v| MultiIndex::unit(n, v)));
            let mut labels = Vec::new();
            for s in &shifts {
                for a in &sub {
                    labels.push((s.clone(), a.clone()));
                }
            }
            let size = labels.len();
            let mut acc = BlockAccumulator::new(size);
            for (r, (sa, a)) in labels.iter().enumerate() {
                for (col, (sb, b)) in labels.iter().enumerate() {
                    acc.add(r, col, &map.affine(&a.add(sb), &b.add(sa))?);
                }
            }
            blocks.push(acc.finish(BlockOrigin::HypoBlock(vars)));
        }
    }

    let mut objective = vec![0.0; map.num_vars()];
    let mut objective_constant = 0.0;
    for ((a, b), v) in p.objective.terms() {
        let e = map.affine(a, b)?;
        objective_constant += (v * e.constant).re;
        for (i, w) in &e.terms {
            objective[*i] += (v * w).re;
        }
    }

    Ok((
        SdpProblem {
            num_vars: map.num_vars(),
            objective,
            objective_constant,
            blocks,
            equalities,
        },
        map,
    ))
}

fn localizing_entry(
    map: &RelaxationMap,
    g: &Polynomial,
    a: &MultiIndex,
    b: &MultiIndex,
) -> Result<Affine, HierarchyError> {
    let mut out = Affine::default();
    for ((gm, dl), v) in g.terms() {
        out.add_scaled(&map.affine(&a.add(gm), &b.add(dl))?, *v);
    }
    Ok(out)
}

/// Real and imaginary parts of `e = 0` as equality rows; trivially
/// satisfied rows are skipped.
fn push_equalities(
    out: &mut Vec<LinearEquality>,
    e: &Affine,
    diagonal: bool,
) -> Result<(), HierarchyError> {
    let parts: &[fn(Complex64) -> f64] = if diagonal {
        &[|z| z.re]
    } else {
        &[|z| z.re, |z| z.im]
    };
    for part in parts {
        let mut coeffs: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, w) in &e.terms {
            *coeffs.entry(*i).or_insert(0.0) += part(*w);
        }
        let coeffs: Vec<(usize, f64)> = coeffs.into_iter().filter(|(_, v)| *v != 0.0).collect();
        let rhs = -part(e.constant);
        if coeffs.is_empty() {
            if rhs.abs() > 1e-12 {
                return Err(HierarchyError::Infeasible(format!(
                    "equality constraint reduces to {} = 0",
                    -rhs
                )));
            }
            continue;
        }
        out.push(LinearEquality { coeffs, rhs });
    }
    Ok(())
}

struct BlockAccumulator {
    size: usize,
    constant: CMatrix,
    coeffs: BTreeMap<usize, CMatrix>,
}

impl BlockAccumulator {
    fn new(size: usize) -> Self {
        Self {
            size,
            constant: CMatrix::zeros(size, size),
            coeffs: BTreeMap::new(),
        }
    }

    fn add(&mut self, r: usize, col: usize, e: &Affine) {
        self.constant[(r, col)] += e.constant;
        for (i, w) in &e.terms {
            let size = self.size;
            self.coeffs.entry(*i).or_insert_with(|| CMatrix::zeros(size, size))[(r, col)] += w;
        }
    }

    fn finish(self, origin: BlockOrigin) -> AffineBlock {
        AffineBlock {
            origin,
            constant: self.constant,
            coeffs: self
                .coeffs
                .into_iter()
                .filter(|(_, m)| m.max_abs() > 0.0)
                .collect(),
        }
    }
}

fn build_block(
    origin: BlockOrigin,
    idx: &[MultiIndex],
    entry: impl Fn(&MultiIndex, &MultiIndex) -> Result<Affine, HierarchyError>,
) -> Result<AffineBlock, HierarchyError> {
    let mut acc = BlockAccumulator::new(idx.len());
    for (r, a) in idx.iter().enumerate() {
        for (col, b) in idx.iter().enumerate() {
            acc.add(r, col, &entry(a, b)?);
        }
    }
    Ok(acc.finish(origin))
}

/// Replaces every complex block `H` by `[[Re H, −Im H], [Im H, Re H]]`.
/// Blocks that are already real are kept as they are.
pub fn realify(s: &SdpProblem) -> SdpProblem {
    let embed = |m: &CMatrix| -> CMatrix {
        let k = m.rows();
        CMatrix::from_fn(2 * k, 2 * k, |i, j| {
            let (bi, bj) = (i / k, j / k);
            let z = m[(i % k, j % k)];
            let v = match (bi, bj) {
                (0, 0) | (1, 1) => z.re,
                (0, 1) => -z.im,
                _ => z.im,
            };
            c(v, 0.0)
        })
    };
    let blocks = s
        .blocks
        .iter()
        .map(|b| {
            if b.is_real() {
                b.clone()
            } else {
                AffineBlock {
                    origin: b.origin.clone(),
                    constant: embed(&b.constant),
                    coeffs: b.coeffs.iter().map(|(i, m)| (*i, embed(m))).collect(),
                }
            }
        })
        .collect();
    SdpProblem {
        num_vars: s.num_vars,
        objective: s.objective.clone(),
        objective_constant: s.objective_constant,
        blocks,
        equalities: s.equalities.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::parse_problem;

    #[test]
    fn map_round_trip() {
        let map = RelaxationMap::new(2, 2);
        let seq = MomentSequence::from_atoms(
            SequenceMode::Paired,
            2,
            &[vec![c(0.3, -0.2), c(1.0, 0.5)]],
            &[c(1.0, 0.0)],
        );
        let y = map.from_sequence(&seq).unwrap();
        let back = map.to_sequence(&y).unwrap();
        for ((a, b), v) in seq.pairs() {
            assert!((back.get(a, b).unwrap() - v).norm() < 1e-15);
        }
        // 36 entries: 1 fixed, 5 diagonal, 15 off-diagonal pairs
        assert_eq!(map.num_vars(), 5 + 2 * 15);
    }

    #[test]
    fn order_below_gap_is_rejected() {
        let text = "version 1\nn 1\nobjective\n1 | 1 | 1 | 0\nconstraint eq\n0 | 2 | 1 | 0\n2 | 0 | 1 | 0\n";
        let p = parse_problem(text).unwrap();
        assert!(matches!(
            assemble_relaxation(&p, 1, false),
            Err(HierarchyError::OrderTooSmall { d: 1, required: 2 })
        ));
    }

    #[test]
    fn realified_hermitian_block_doubles_spectrum() {
        let h = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(1.0, 0.0)]]);
        let s = SdpProblem {
            num_vars: 0,
            objective: vec![],
            objective_constant: 0.0,
            blocks: vec![AffineBlock {
                origin: BlockOrigin::Moment,
                constant: h,
                coeffs: vec![],
            }],
            equalities: vec![],
        };
        let r = realify(&s);
        let e = crate::linalg::hermitian_eig(&r.blocks[0].constant, 1e-12).unwrap();
        let want = [0.0, 0.0, 2.0, 2.0];
        for (g, w) in e.eigenvalues.iter().zip(want) {
            assert!((g - w).abs() < 1e-12);
        }
    }
}
