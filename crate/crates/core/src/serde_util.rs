//! Serialization helpers shared by the report types.

use serde::ser::{SerializeSeq, Serializer};

use crate::numerics::Mat;

pub(crate) fn rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub(crate) fn matrix<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
    let r = rows(m);
    let mut seq = s.serialize_seq(Some(r.len()))?;
    for row in &r {
        seq.serialize_element(row)?;
    }
    seq.end()
}

pub(crate) fn one_based<S: Serializer>(i: &usize, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(*i as u64 + 1)
}

/// Non-finite values (e.g. the abscissa of an empty matrix) become `null`.
pub(crate) fn finite_or_null<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}
