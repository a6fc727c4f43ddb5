use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

/// Largest supported number of base coordinates.
pub const MAX_DIM: usize = 4;

/// Multiplicities of each base coordinate in a derivative, so `u_xt` and
/// `u_tx` share one representation.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(pub [u8; MAX_DIM]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0; MAX_DIM]);

    pub fn unit(i: usize) -> Self {
        let mut m = Self::ZERO;
        m.0[i] = 1;
        m
    }

    /// Builds a multi-index from a list of coordinate indices (repetitions allowed).
    pub fn from_indices(indices: &[usize]) -> Self {
        let mut m = Self::ZERO;
        for &i in indices {
            m.0[i] += 1;
        }
        m
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    pub fn count(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn shifted(&self, i: usize) -> Self {
        let mut m = *self;
        m.0[i] += 1;
        m
    }

    /// `self - other`, if `other` divides `self` componentwise.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut m = Self::ZERO;
        for i in 0..MAX_DIM {
            m.0[i] = self.0[i].checked_sub(other.0[i])?;
        }
        Some(m)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        let mut m = Self::ZERO;
        for i in 0..MAX_DIM {
            m.0[i] = self.0[i] + other.0[i];
        }
        m
    }

    /// Sorted list of coordinate indices, e.g. `[0, 2]` for `xt` in (x, y, t).
    pub fn indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.order());
        for (i, &c) in self.0.iter().enumerate() {
            out.extend(std::iter::repeat_n(i, c as usize));
        }
        out
    }

    /// Number of distinct orderings of `indices()`; the multinomial coefficient.
    pub fn multinomial(&self) -> u64 {
        let mut num: u64 = 1;
        let mut k: u64 = 0;
        for &c in &self.0 {
            for j in 1..=c as u64 {
                k += 1;
                num = num * k / j;
            }
        }
        num
    }

    /// All multi-indices of exactly the given order in `dim` coordinates.
    pub fn all_of_order(dim: usize, order: usize) -> Vec<MultiIndex> {
        fn rec(dim: usize, pos: usize, left: usize, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
            if pos + 1 == dim {
                cur.0[pos] = left as u8;
                out.push(*cur);
                cur.0[pos] = 0;
                return;
            }
            for c in (0..=left).rev() {
                cur.0[pos] = c as u8;
                rec(dim, pos + 1, left - c, cur, out);
            }
            cur.0[pos] = 0;
        }
        let mut out = Vec::new();
        if dim == 0 {
            return out;
        }
        rec(dim, 0, order, &mut Self::ZERO.clone(), &mut out);
        out
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.indices())
    }
}

/// A jet coordinate `u_α`: unknown number plus derivative multi-index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct JetVar {
    pub unknown: u8,
    pub index: MultiIndex,
}

impl JetVar {
    pub fn new(unknown: usize, index: MultiIndex) -> Self {
        JetVar { unknown: unknown as u8, index }
    }

    pub fn base(unknown: usize) -> Self {
        Self::new(unknown, MultiIndex::ZERO)
    }

    pub fn order(&self) -> usize {
        self.index.order()
    }

    pub fn shifted(&self, i: usize) -> Self {
        JetVar { unknown: self.unknown, index: self.index.shifted(i) }
    }
}

/// Every symbol an expression may contain.
///
/// `Gen` jets stand for total derivatives `D_α F_a` of the generator of
/// equation `a`; they behave like jets under total differentiation and are
/// used to carry reduction certificates. `Aux` symbols are constants for
/// both partial and total derivatives unless differentiated explicitly.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Var {
    Base(u8),
    Jet(JetVar),
    Lambda,
    Gen(JetVar),
    Aux(u32),
}

impl Var {
    pub fn jet(unknown: usize, index: MultiIndex) -> Var {
        Var::Jet(JetVar::new(unknown, index))
    }

    pub fn as_jet(&self) -> Option<JetVar> {
        match self {
            Var::Jet(j) => Some(*j),
            _ => None,
        }
    }

    pub fn is_aux(&self) -> bool {
        matches!(self, Var::Aux(_))
    }

    /// Image of the variable under the total derivative `D_i`, when it is a
    /// single variable (`None` means the derivative is 0 or 1 respectively
    /// handled by the caller).
    pub(crate) fn prolonged(&self, i: usize) -> Option<Var> {
        match self {
            Var::Jet(j) => Some(Var::Jet(j.shifted(i))),
            Var::Gen(j) => Some(Var::Gen(j.shifted(i))),
            _ => None,
        }
    }
}

struct AuxTable {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

fn aux_table() -> &'static RwLock<AuxTable> {
    static TABLE: OnceLock<RwLock<AuxTable>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(AuxTable { names: Vec::new(), ids: HashMap::new() }))
}

/// Interns an auxiliary symbol by name; equal names give equal variables.
pub fn aux(name: &str) -> Var {
    if let Some(&id) = aux_table().read().unwrap().ids.get(name) {
        return Var::Aux(id);
    }
    let mut t = aux_table().write().unwrap();
    if let Some(&id) = t.ids.get(name) {
        return Var::Aux(id);
    }
    let id = t.names.len() as u32;
    t.names.push(name.to_string());
    t.ids.insert(name.to_string(), id);
    Var::Aux(id)
}

pub fn aux_name(id: u32) -> String {
    aux_table().read().unwrap().names.get(id as usize).cloned().unwrap_or_else(|| format!("aux{id}"))
}
