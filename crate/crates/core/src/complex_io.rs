//! Serde adapters writing complex numbers as `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn to_pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

pub fn from_pair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub mod pair {
    use super::*;

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        to_pair(*c).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        <[f64; 2]>::deserialize(d).map(from_pair)
    }
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().copied().map(to_pair).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?
            .into_iter()
            .map(from_pair)
            .collect())
    }
}

pub mod option_pair {
    use super::*;

    pub fn serialize<S: Serializer>(c: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        c.map(to_pair).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Complex64>, D::Error> {
        Ok(Option::<[f64; 2]>::deserialize(d)?.map(from_pair))
    }
}

/// Lists of complex vectors as nested `[re, im]` arrays.
pub mod rows {
    use super::*;

    pub fn serialize<S: Serializer>(rows: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        let w: Vec<Vec<[f64; 2]>> = rows
            .iter()
            .map(|r| r.iter().copied().map(to_pair).collect())
            .collect();
        w.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Complex64>>, D::Error> {
        Ok(Vec::<Vec<[f64; 2]>>::deserialize(d)?
            .into_iter()
            .map(|r| r.into_iter().map(from_pair).collect())
            .collect())
    }
}

/// Row-major complex matrices as nested `[re, im]` arrays.
pub mod matrix {
    use super::*;
    use nalgebra::DMatrix;
    use serde::de::Error as _;

    pub fn serialize<S: Serializer>(a: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..a.nrows())
            .map(|i| (0..a.ncols()).map(|j| to_pair(a[(i, j)])).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<Complex64>, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_rows(&rows).map_err(D::Error::custom)
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<Complex64>, String> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err("ragged matrix rows".into());
        }
        Ok(DMatrix::from_fn(nrows, ncols, |i, j| from_pair(rows[i][j])))
    }
}
