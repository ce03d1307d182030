use serde::{Deserialize, Serialize};

/// Index pairs of the symmetric second-order functions, in `(11, 22, 12)` order.
pub const SYM_PAIRS: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

/// Slot of `(a, b)` in [`SYM_PAIRS`].
pub fn sym_index(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (0, 0) => 0,
        (1, 1) => 1,
        _ => 2,
    }
}

/// Identifies one auxiliary cell function.
///
/// Scalar functions (temperature correctors) have one component per node,
/// vector functions (displacement correctors) two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellFn {
    /// `M_a`
    M(usize),
    /// `N^a_{.m}`
    N(usize, usize),
    P,
    S,
    /// `M_{a1 a2}`, symmetrised; index into [`SYM_PAIRS`].
    M2(usize),
    /// `R_{a1 g}`, multiplying `dT0/dx_g dT0/dx_a1`.
    R(usize, usize),
    /// `B_{a1 a2}`
    B(usize, usize),
    /// `N^{a1 a2}_{.m}`, symmetrised pair index and `m`.
    N2(usize, usize),
    /// `Z^{a1 g}_{.m}`
    Z(usize, usize, usize),
    /// `Q^g`
    Q(usize),
    /// `H^{a1}`
    H(usize),
    /// `W^{a1}`
    W(usize),
    /// `A^{a1 a2}_{.m}`
    A(usize, usize, usize),
}

pub const FIRST_ORDER_SLOTS: usize = 7;
pub const SLOT_COUNT: usize = 47;

impl CellFn {
    pub fn slot(self) -> usize {
        match self {
            CellFn::M(a) => a,
            CellFn::N(a, m) => 2 + 2 * a + m,
            CellFn::P => 6,
            CellFn::S => 7,
            CellFn::M2(s) => 8 + s,
            CellFn::R(a, g) => 11 + 2 * a + g,
            CellFn::B(a, b) => 15 + 2 * a + b,
            CellFn::N2(s, m) => 19 + 2 * s + m,
            CellFn::Z(a, g, m) => 25 + 4 * a + 2 * g + m,
            CellFn::Q(g) => 33 + g,
            CellFn::H(a) => 35 + a,
            CellFn::W(a) => 37 + a,
            CellFn::A(a, b, m) => 39 + 4 * a + 2 * b + m,
        }
    }

    pub fn components(self) -> usize {
        match self {
            CellFn::M(_) | CellFn::S | CellFn::M2(_) | CellFn::R(..) | CellFn::B(..) => 1,
            _ => 2,
        }
    }

    pub fn is_first_order(self) -> bool {
        self.slot() < FIRST_ORDER_SLOTS
    }

    /// Functions that vanish identically for temperature-independent laws.
    pub fn is_temperature_induced(self) -> bool {
        matches!(self, CellFn::R(..) | CellFn::B(..) | CellFn::Z(..) | CellFn::Q(_) | CellFn::W(_) | CellFn::A(..))
    }

    /// Functions whose source realises macroscopic x-derivatives.
    pub fn is_directional(self) -> bool {
        matches!(self, CellFn::R(..) | CellFn::Z(..) | CellFn::Q(_))
    }

    pub fn all() -> Vec<CellFn> {
        let mut v = Vec::with_capacity(SLOT_COUNT);
        v.extend((0..2).map(CellFn::M));
        v.extend((0..4).map(|i| CellFn::N(i / 2, i % 2)));
        v.push(CellFn::P);
        v.push(CellFn::S);
        v.extend((0..3).map(CellFn::M2));
        v.extend((0..4).map(|i| CellFn::R(i / 2, i % 2)));
        v.extend((0..4).map(|i| CellFn::B(i / 2, i % 2)));
        v.extend((0..6).map(|i| CellFn::N2(i / 2, i % 2)));
        v.extend((0..8).map(|i| CellFn::Z(i / 4, (i / 2) % 2, i % 2)));
        v.extend((0..2).map(CellFn::Q));
        v.extend((0..2).map(CellFn::H));
        v.extend((0..2).map(CellFn::W));
        v.extend((0..8).map(|i| CellFn::A(i / 4, (i / 2) % 2, i % 2)));
        v
    }

    /// Short label used in exports, e.g. `N2_12_1`.
    pub fn label(self) -> String {
        let p = |s: usize| {
            let (a, b) = SYM_PAIRS[s];
            format!("{}{}", a + 1, b + 1)
        };
        match self {
            CellFn::M(a) => format!("M_{}", a + 1),
            CellFn::N(a, m) => format!("N_{}_{}", a + 1, m + 1),
            CellFn::P => "P".into(),
            CellFn::S => "S".into(),
            CellFn::M2(s) => format!("M2_{}", p(s)),
            CellFn::R(a, g) => format!("R_{}{}", a + 1, g + 1),
            CellFn::B(a, b) => format!("B_{}{}", a + 1, b + 1),
            CellFn::N2(s, m) => format!("N2_{}_{}", p(s), m + 1),
            CellFn::Z(a, g, m) => format!("Z_{}{}_{}", a + 1, g + 1, m + 1),
            CellFn::Q(g) => format!("Q_{}", g + 1),
            CellFn::H(a) => format!("H_{}", a + 1),
            CellFn::W(a) => format!("W_{}", a + 1),
            CellFn::A(a, b, m) => format!("A_{}{}_{}", a + 1, b + 1, m + 1),
        }
    }
}

/// Nodal values of the cell functions of one (sample, temperature) pair.
///
/// Slots that were not computed (second-order functions in a first-order
/// run, or directional functions when x-derivatives are dropped) are empty
/// and read as zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFunctionSet {
    pub nodes: usize,
    pub slots: Vec<Vec<f64>>,
}

impl CellFunctionSet {
    pub fn empty(nodes: usize) -> Self {
        CellFunctionSet { nodes, slots: vec![Vec::new(); SLOT_COUNT] }
    }

    pub fn set(&mut self, f: CellFn, values: Vec<f64>) {
        assert_eq!(values.len(), self.nodes * f.components(), "wrong length for {}", f.label());
        self.slots[f.slot()] = values;
    }

    pub fn has(&self, f: CellFn) -> bool {
        !self.slots[f.slot()].is_empty()
    }

    /// Values of `f`, or `None` if the slot was not computed.
    pub fn get(&self, f: CellFn) -> Option<&[f64]> {
        let s = &self.slots[f.slot()];
        (!s.is_empty()).then_some(s.as_slice())
    }

    /// Value of component `c` of `f` at `node`; zero for empty slots.
    #[inline]
    pub fn value(&self, f: CellFn, node: usize, c: usize) -> f64 {
        let s = &self.slots[f.slot()];
        if s.is_empty() {
            0.0
        } else {
            s[node * f.components() + c]
        }
    }

    pub fn max_abs(&self, f: CellFn) -> f64 {
        self.slots[f.slot()].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn computed(&self) -> impl Iterator<Item = CellFn> + '_ {
        CellFn::all().into_iter().filter(|&f| self.has(f))
    }
}
