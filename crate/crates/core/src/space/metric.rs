use crate::error::{Error, Result};

/// Dense symmetric distance matrix, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from full rows. Symmetry and the diagonal are checked
    /// here; the triangle inequality is checked by [`DistanceMatrix::validate`].
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::input(format!(
                    "matrix row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        let m = DistanceMatrix { n, data };
        m.check_entries()?;
        Ok(m)
    }

    /// Builds a matrix from the strict lower triangle in row-major order:
    /// `d(1,0), d(2,0), d(2,1), d(3,0), ...`.
    pub fn from_lower_triangle(n: usize, lower: &[f64]) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if lower.len() != expected {
            return Err(Error::input(format!(
                "lower triangle for {n} points needs {expected} entries, got {}",
                lower.len()
            )));
        }
        let mut data = vec![0.0; n * n];
        let mut k = 0;
        for i in 1..n {
            for j in 0..i {
                data[i * n + j] = lower[k];
                data[j * n + i] = lower[k];
                k += 1;
            }
        }
        let m = DistanceMatrix { n, data };
        m.check_entries()?;
        Ok(m)
    }

    pub fn lower_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 1..self.n {
            for j in 0..i {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    fn check_entries(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::MetricAxiom(format!(
                    "diagonal entry d({i},{i}) = {} is not zero",
                    self.get(i, i)
                )));
            }
            for j in 0..i {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if !a.is_finite() || a <= 0.0 {
                    return Err(Error::MetricAxiom(format!(
                        "d({i},{j}) = {a} must be finite and positive"
                    )));
                }
                if a != b {
                    return Err(Error::MetricAxiom(format!(
                        "asymmetric entries d({i},{j}) = {a}, d({j},{i}) = {b}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks the triangle inequality. All triples are checked for
    /// `n <= 256`; larger matrices are checked on `samples` random triples.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<()> {
        let n = self.n;
        let check = |i: usize, j: usize, k: usize| -> Result<()> {
            let direct = self.get(i, k);
            let via = self.get(i, j) + self.get(j, k);
            if direct > via * (1.0 + 1e-12) {
                return Err(Error::MetricAxiom(format!(
                    "triangle inequality fails for triple ({i},{j},{k}): \
                     d({i},{k}) = {direct} > d({i},{j}) + d({j},{k}) = {via}"
                )));
            }
            Ok(())
        };
        if n <= 256 {
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        if i != j && j != k && i != k {
                            check(i, j, k)?;
                        }
                    }
                }
            }
        } else {
            use rand::Rng;
            let mut rng = crate::rng::stream(seed, "matrix-validation");
            for _ in 0..samples {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                let k = rng.gen_range(0..n);
                if i != j && j != k && i != k {
                    check(i, j, k)?;
                }
            }
        }
        Ok(())
    }
}

/// Which metric the coordinates of a space are measured with.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricSpec {
    /// Euclidean distance between coordinate vectors.
    Euclidean,
    /// Chordal distance on the unit sphere: Euclidean distance in R^3
    /// between unit vectors.
    ChordalSphere,
    /// Euclidean distance raised to `exponent` in (0, 1].
    Snowflake { exponent: f64 },
    /// Product of the real line and the line snowflaked by `1/(s-1)`:
    /// `(|dx|^2 + |dy|^(2/(s-1)))^(1/2)`, with `dimension = s > 2`.
    RickmanRug { dimension: f64 },
    /// Distances read from an explicit matrix; coordinates are ignored.
    ExplicitMatrix(DistanceMatrix),
}

impl MetricSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            MetricSpec::Snowflake { exponent } if !(*exponent > 0.0 && *exponent <= 1.0) => Err(
                Error::input(format!("snowflake exponent {exponent} outside (0, 1]")),
            ),
            MetricSpec::RickmanRug { dimension } if !(*dimension > 2.0) => Err(Error::input(
                format!("rug dimension {dimension} must exceed 2"),
            )),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricSpec::Euclidean => "euclidean",
            MetricSpec::ChordalSphere => "chordal_sphere",
            MetricSpec::Snowflake { .. } => "snowflake",
            MetricSpec::RickmanRug { .. } => "rickman_rug",
            MetricSpec::ExplicitMatrix(_) => "explicit_matrix",
        }
    }

    /// Distance between two coordinate vectors. Not meaningful for
    /// explicit matrices.
    #[inline]
    pub fn coord_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            MetricSpec::Euclidean | MetricSpec::ChordalSphere => euclid(a, b),
            MetricSpec::Snowflake { exponent } => euclid(a, b).powf(*exponent),
            MetricSpec::RickmanRug { dimension } => {
                rug_distance(a[0] - b[0], a[1] - b[1], *dimension)
            }
            MetricSpec::ExplicitMatrix(_) => f64::NAN,
        }
    }

    /// Per-axis half widths of a coordinate box containing every point
    /// within metric distance `r` of a point.
    pub(crate) fn box_half_widths(&self, r: f64, dim: usize) -> Vec<f64> {
        // slack keeps the box a superset under rounding; the exact metric
        // filter runs afterwards
        let pad = |w: f64| w * (1.0 + 1e-9) + 1e-300;
        match self {
            MetricSpec::Euclidean | MetricSpec::ChordalSphere => vec![pad(r); dim],
            MetricSpec::Snowflake { exponent } => vec![pad(r.powf(1.0 / exponent)); dim],
            MetricSpec::RickmanRug { dimension } => {
                vec![pad(r), pad(r.powf(dimension - 1.0))]
            }
            MetricSpec::ExplicitMatrix(_) => Vec::new(),
        }
    }
}

#[inline]
fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Rug distance for coordinate offsets `(dx, dy)`.
#[inline]
pub fn rug_distance(dx: f64, dy: f64, dimension: f64) -> f64 {
    (dx * dx + dy.abs().powf(2.0 / (dimension - 1.0))).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rug_vertical_offset_is_snowflaked() {
        let d = MetricSpec::RickmanRug { dimension: 3.0 }.coord_distance(&[0.0, 0.0], &[0.0, 1e-4]);
        assert!((d - 0.01).abs() < 1e-15);
    }

    #[test]
    fn rug_horizontal_offset_is_euclidean() {
        let d = MetricSpec::RickmanRug { dimension: 3.0 }.coord_distance(&[0.0, 0.0], &[0.37, 0.0]);
        assert_eq!(d, 0.37);
    }

    #[test]
    fn snowflake_at_exponent_one_is_euclidean() {
        let a = [0.1, 0.7];
        let b = [0.4, 0.3];
        let e = MetricSpec::Euclidean.coord_distance(&a, &b);
        let s = MetricSpec::Snowflake { exponent: 1.0 }.coord_distance(&a, &b);
        assert_eq!(e, s);
    }

    #[test]
    fn lower_triangle_round_trip() {
        let m = DistanceMatrix::from_lower_triangle(3, &[1.0, 2.0, 1.0]).unwrap();
        assert_eq!(m.get(0, 2), 2.0);
        assert_eq!(m.get(2, 1), 1.0);
        assert_eq!(m.lower_triangle(), vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn triangle_violation_names_triple() {
        let m = DistanceMatrix::from_lower_triangle(3, &[1.0, 5.0, 1.0]).unwrap();
        let err = m.validate(0, 0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(0,1,2)") || msg.contains("(2,1,0)"), "{msg}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MetricSpec::Snowflake { exponent: 1.5 }.validate().is_err());
        assert!(MetricSpec::Snowflake { exponent: 0.0 }.validate().is_err());
        assert!(MetricSpec::RickmanRug { dimension: 2.0 }
            .validate()
            .is_err());
        assert!(MetricSpec::RickmanRug { dimension: 2.5 }.validate().is_ok());
    }

    #[test]
    fn rejects_zero_off_diagonal() {
        assert!(DistanceMatrix::from_lower_triangle(2, &[0.0]).is_err());
    }
}
