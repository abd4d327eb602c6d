//! The three reference polynomials on `n = 3` features and the values
//! tabulated for them in the original interpretation tables.
//!
//! Columns follow the printed order: `(-1,-1,-1), (-1,-1,+1), ..., (+1,+1,+1)`,
//! i.e. `x_0` is the most significant coordinate.

use crate::cube::{SignedPoint, SparseSpectrum, Subset};

/// One printed cell: a check mark means "equals the ground truth".
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Check,
    Value(f64),
}

/// A method row as printed, with the order of the interpretation it reports.
#[derive(Clone, Copy, Debug)]
pub struct PrintedRow {
    pub method: &'static str,
    pub cells: [Cell; 8],
}

#[derive(Clone, Copy, Debug)]
pub struct ReferenceTable {
    pub name: &'static str,
    pub terms: &'static [(&'static [usize], f64)],
    pub ground_truth: [f64; 8],
    pub rows: &'static [PrintedRow],
}

impl ReferenceTable {
    pub fn spectrum(&self) -> SparseSpectrum {
        SparseSpectrum::from_terms(
            3,
            self.terms
                .iter()
                .map(|(ix, c)| (Subset::new(ix).expect("static subset"), *c)),
        )
        .expect("static spectrum")
    }

    pub fn row(&self, method: &str) -> Option<&PrintedRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// The eight table columns as points.
pub fn column_points() -> [SignedPoint; 8] {
    std::array::from_fn(|j| {
        let sign = |bit: usize| if j >> bit & 1 == 1 { 1 } else { -1 };
        SignedPoint::new(&[sign(2), sign(1), sign(0)]).expect("static point")
    })
}

use Cell::{Check as C, Value as V};

const ALL_CHECK: [Cell; 8] = [C, C, C, C, C, C, C, C];

const LINEAR: &[(&[usize], f64)] = &[(&[0], 1.0 / 2.0), (&[1], -1.0 / 3.0), (&[2], 1.0 / 4.0)];

const QUADRATIC: &[(&[usize], f64)] = &[
    (&[0], 1.0 / 2.0),
    (&[1], -1.0 / 3.0),
    (&[2], 1.0 / 4.0),
    (&[0, 1], -1.0 / 5.0),
    (&[0, 2], 1.0 / 6.0),
    (&[1, 2], -1.0 / 7.0),
];

const CUBIC: &[(&[usize], f64)] = &[
    (&[0], 1.0 / 2.0),
    (&[1], -1.0 / 3.0),
    (&[2], 1.0 / 4.0),
    (&[0, 1], -1.0 / 5.0),
    (&[0, 2], 1.0 / 6.0),
    (&[1, 2], -1.0 / 7.0),
    (&[0, 1, 2], 1.0 / 8.0),
];

pub const F1: ReferenceTable = ReferenceTable {
    name: "f1",
    terms: LINEAR,
    ground_truth: [-0.417, 0.083, -1.083, -0.583, 0.583, 1.083, -0.083, 0.417],
    rows: &[
        PrintedRow { method: "lime", cells: ALL_CHECK },
        PrintedRow { method: "shap", cells: ALL_CHECK },
        PrintedRow { method: "shapley-interaction-1", cells: ALL_CHECK },
        PrintedRow { method: "shapley-taylor-1", cells: ALL_CHECK },
        PrintedRow { method: "low-degree-1", cells: ALL_CHECK },
        PrintedRow { method: "harmonica-1", cells: ALL_CHECK },
    ],
};

pub const F2: ReferenceTable = ReferenceTable {
    name: "f2",
    terms: QUADRATIC,
    ground_truth: [-0.593, -0.140, -0.574, -0.693, 0.474, 1.593, -0.307, 0.240],
    rows: &[
        PrintedRow {
            method: "lime",
            cells: [V(-0.417), V(0.083), V(-1.083), V(-0.583), V(0.583), V(1.083), V(-0.083), V(0.417)],
        },
        PrintedRow {
            method: "shap",
            cells: [V(-0.240), V(0.283), V(-1.250), V(-0.726), V(0.726), V(1.250), V(-0.283), C],
        },
        PrintedRow {
            method: "shapley-interaction-2",
            cells: [V(-0.329), V(0.171), V(-0.995), V(-0.781), V(0.671), V(1.505), V(-0.395), V(0.152)],
        },
        PrintedRow { method: "shapley-taylor-2", cells: ALL_CHECK },
        PrintedRow { method: "low-degree-2", cells: ALL_CHECK },
        PrintedRow { method: "harmonica-2", cells: ALL_CHECK },
    ],
};

pub const F3: ReferenceTable = ReferenceTable {
    name: "f3",
    terms: CUBIC,
    // the third entry is printed as +0.449; the polynomial evaluates to -0.449 there
    ground_truth: [-0.718, -0.015, 0.449, -0.818, 0.599, 1.468, -0.432, 0.365],
    rows: &[
        PrintedRow {
            method: "lime",
            cells: [V(-0.417), V(0.083), V(-1.083), V(-0.583), V(0.583), V(1.083), V(-0.083), V(0.417)],
        },
        PrintedRow {
            method: "shap",
            cells: [V(-0.365), V(0.242), V(-1.292), V(-0.685), V(0.685), V(1.292), V(-0.242), C],
        },
        PrintedRow {
            method: "shapley-interaction-3",
            cells: [V(-0.485), V(0.224), V(-0.943), V(-0.896), V(0.724), V(1.390), V(-0.510), V(0.496)],
        },
        PrintedRow {
            method: "shapley-taylor-3",
            cells: [C, V(0.194), V(-0.606), V(-0.970), V(0.751), V(1.625), V(-0.642), C],
        },
        PrintedRow { method: "low-degree-3", cells: ALL_CHECK },
        PrintedRow { method: "harmonica-3", cells: ALL_CHECK },
    ],
};

pub const TABLES: [ReferenceTable; 3] = [F1, F2, F3];

pub fn f1() -> SparseSpectrum {
    F1.spectrum()
}

pub fn f2() -> SparseSpectrum {
    F2.spectrum()
}

pub fn f3() -> SparseSpectrum {
    F3.spectrum()
}

/// Looks up a reference polynomial by name (`f1`, `f2`, `f3`).
pub fn by_name(name: &str) -> Option<SparseSpectrum> {
    TABLES.iter().find(|t| t.name == name).map(|t| t.spectrum())
}
