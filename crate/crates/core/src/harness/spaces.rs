//! Named complexes and target spaces, shared by the CLI and the pipeline.
//!
//! Complex specs: `grid:AxB`, `book:K`, `cube:N`, `star:K`, `lshape`,
//! `random:STEPS:SEED`, `tree:N:SEED`, or a path to a JSON complex file.
//! Target specs: `segment[:L]`, `tripod`, `rays:K`, `cone:<complex>@<vertex>`,
//! or `[complex:]<complex>`; a `builtin:` prefix is accepted and ignored.

use std::path::Path;

use crate::complex::{
    book, grid, l_shape_raw, random_square_complex, random_tree_raw, star_tree, unit_cube, CubeComplex, RawComplex,
};
use crate::error::{Error, Result};
use crate::geometry::{ComplexSpace, EuclideanBox, SubdivisionConfig, TangentCone};

pub fn load_complex(spec: &str) -> Result<CubeComplex> {
    let bad = || Error::Config(format!("bad complex spec {spec:?}"));
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let validated = |raw: RawComplex| CubeComplex::validate(&raw).map_err(Error::Violations);
    match parts.as_slice() {
        ["grid", dims] => {
            let (a, b) = dims.split_once('x').ok_or_else(bad)?;
            Ok(grid(num(a)?, num(b)?))
        }
        ["book", k] => Ok(book(num(k)?)),
        ["cube", n] => Ok(unit_cube(num(n)?)),
        ["star", k] => Ok(star_tree(num(k)?)),
        ["lshape"] => validated(l_shape_raw()),
        ["random", steps, seed] => Ok(random_square_complex(num(steps)?, num(seed)? as u64)),
        ["tree", n, seed] => validated(random_tree_raw(num(n)?, num(seed)? as u64)),
        _ if Path::new(spec).exists() => validated(RawComplex::load(spec)?),
        _ => Err(Error::Config(format!("unknown complex {spec:?} (not a builtin and no such file)"))),
    }
}

/// A target space of one of the supported kinds.
#[derive(Debug, Clone)]
pub enum Target {
    Segment(EuclideanBox),
    Cone(TangentCone),
    Complex(ComplexSpace),
}

/// Run `$body` with `$s` bound to the concrete space inside a [`Target`].
#[macro_export]
macro_rules! with_target {
    ($target:expr, $s:ident => $body:expr) => {
        match $target {
            $crate::harness::Target::Segment($s) => $body,
            $crate::harness::Target::Cone($s) => $body,
            $crate::harness::Target::Complex($s) => $body,
        }
    };
}

impl Target {
    pub fn parse(spec: &str, level: usize) -> Result<Self> {
        let spec = spec.strip_prefix("builtin:").unwrap_or(spec);
        let bad = || Error::Config(format!("bad space spec {spec:?}"));
        if spec == "segment" {
            return Ok(Target::Segment(EuclideanBox::segment(1.0)));
        }
        if let Some(l) = spec.strip_prefix("segment:") {
            let l: f64 = l.parse().map_err(|_| bad())?;
            if !(l > 0.0) {
                return Err(bad());
            }
            return Ok(Target::Segment(EuclideanBox::segment(l)));
        }
        if spec == "tripod" {
            return Ok(Target::Cone(TangentCone::rays(3)));
        }
        if let Some(k) = spec.strip_prefix("rays:") {
            return Ok(Target::Cone(TangentCone::rays(k.parse().map_err(|_| bad())?)));
        }
        if let Some(rest) = spec.strip_prefix("cone:") {
            let (cx, v) = rest.rsplit_once('@').ok_or_else(bad)?;
            let x = load_complex(cx)?;
            let v: usize = v.parse().map_err(|_| bad())?;
            return Ok(Target::Cone(TangentCone::from_star(&x.star_faces(v)?)?));
        }
        let cx = spec.strip_prefix("complex:").unwrap_or(spec);
        let x = load_complex(cx)?;
        Ok(Target::Complex(ComplexSpace::new(x, SubdivisionConfig { level, ..SubdivisionConfig::default() })?))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Target::Segment(_) => "segment",
            Target::Cone(_) => "cone",
            Target::Complex(_) => "complex",
        }
    }

    /// Whether the space is an R-tree or flat, where the invariant is 0.
    pub fn is_tree_like(&self) -> bool {
        match self {
            Target::Segment(_) => true,
            Target::Cone(c) => c.maximal_faces().iter().all(|f| f.count_ones() <= 1),
            Target::Complex(s) => s.complex().dimension() <= 1,
        }
    }

    /// Upper bound on the Izeki-Nayatani invariant of the space: 0 for trees
    /// and segments, 1/2 for cube complexes and their cones.
    pub fn delta_upper(&self) -> f64 {
        if self.is_tree_like() {
            0.0
        } else {
            0.5
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_specs() {
        assert_eq!(load_complex("grid:2x3").unwrap().vertex_count(), 12);
        assert_eq!(load_complex("book:3").unwrap().dimension(), 2);
        assert!(load_complex("nope").is_err());
        assert_eq!(Target::parse("builtin:segment", 4).unwrap().kind(), "segment");
        assert_eq!(Target::parse("tripod", 4).unwrap().delta_upper(), 0.0);
        let c = Target::parse("cone:grid:2x2@4", 4).unwrap();
        assert_eq!(c.kind(), "cone");
        assert_eq!(c.delta_upper(), 0.5);
        assert!(Target::parse("tree:8:1", 4).unwrap().is_tree_like());
    }
}
