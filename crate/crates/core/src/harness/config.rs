//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Keys are unique and case-sensitive; every key has a default.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::constitutive::{ConstitutiveModel, EnergyModel, ViscosityModel};
use crate::error::{Error, Result};
use crate::solver::stepper::SolverConfig;

macro_rules! keyword_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str().eq_ignore_ascii_case(s))
                    .ok_or_else(|| {
                        let names: Vec<_> = Self::ALL.iter().map(|v| v.as_str()).collect();
                        format!("expected one of {}, got `{s}`", names.join(", "))
                    })
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum!(Command {
    Check => "check",
    Korn => "korn",
    Simulate => "simulate",
    Convergence => "convergence",
});

keyword_enum!(EnergyKind {
    W0 => "W0",
    W1 => "W1",
    W2 => "W2",
});

keyword_enum!(ViscosityKind {
    Z0DoublePrime => "Z0doubleprime",
    Z0Prime => "Z0prime",
    Zm => "Zm",
});

keyword_enum!(
    /// Initial data on the grid.
    Preset {
        Rest => "rest",
        Sinusoidal => "sinusoidal",
        Compression => "compression",
        Fold => "fold",
    }
);

keyword_enum!(
    /// Tensor examined by `korn`: the model tangent or a fixed test tensor.
    Tangent {
        Model => "model",
        Identity => "identity",
        NegIdentity => "neg_identity",
        Sym => "sym",
        TwoSym => "two_sym",
    }
);

keyword_enum!(Stencil {
    Consistent => "consistent",
    Broken => "broken",
});

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub energy: EnergyKind,
    /// Exponent of the volumetric term of `W1`/`W2`.
    pub q: f64,
    pub viscosity: ViscosityKind,
    pub m: u32,
    pub dim: usize,
    pub cells: usize,
    pub dt: f64,
    pub t_end: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub det_floor: f64,
    pub linear_tol: f64,
    /// Defaults to `dim + 3` when unset.
    pub p_norm: Option<f64>,
    pub save_every: usize,
    pub preset: Preset,
    pub amplitude: f64,
    pub mode: u32,
    pub rate: f64,
    pub tangent: Tangent,
    /// Row-major; identity when unset.
    pub f0: Option<Vec<f64>>,
    /// Row-major; zero when unset.
    pub q0: Option<Vec<f64>>,
    pub resolution: usize,
    pub fields: usize,
    pub max_modes: usize,
    pub levels: usize,
    pub spatial_cells: usize,
    pub spatial_dt: f64,
    pub spatial_t_end: f64,
    pub temporal_cells: usize,
    pub exact_amplitude: f64,
    pub stencil: Stencil,
    pub min_spatial_rate: f64,
    pub min_temporal_rate: f64,
    pub output: Option<String>,
    pub seed: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            command: Command::Simulate,
            energy: EnergyKind::W0,
            q: 2.0,
            viscosity: ViscosityKind::Z0DoublePrime,
            m: 0,
            dim: 1,
            cells: 32,
            dt: 1e-3,
            t_end: 1.0,
            picard_tol: 1e-10,
            picard_max: 5,
            det_floor: 1e-3,
            linear_tol: 1e-10,
            p_norm: None,
            save_every: 10,
            preset: Preset::Rest,
            amplitude: 0.1,
            mode: 1,
            rate: 10.0,
            tangent: Tangent::Model,
            f0: None,
            q0: None,
            resolution: 360,
            fields: 100,
            max_modes: 3,
            levels: 3,
            spatial_cells: 8,
            spatial_dt: 2e-5,
            spatial_t_end: 0.1,
            temporal_cells: 64,
            exact_amplitude: 0.01,
            stencil: Stencil::Consistent,
            min_spatial_rate: 1.9,
            min_temporal_rate: 0.9,
            output: None,
            seed: 0,
        }
    }
}

pub const KEYS: &[&str] = &[
    "command",
    "energy",
    "q",
    "viscosity",
    "m",
    "dim",
    "cells",
    "dt",
    "t_end",
    "picard_tol",
    "picard_max",
    "det_floor",
    "linear_tol",
    "p_norm",
    "save_every",
    "preset",
    "amplitude",
    "mode",
    "rate",
    "tangent",
    "f0",
    "q0",
    "resolution",
    "fields",
    "max_modes",
    "levels",
    "spatial_cells",
    "spatial_dt",
    "spatial_t_end",
    "temporal_cells",
    "exact_amplitude",
    "stencil",
    "min_spatial_rate",
    "min_temporal_rate",
    "output",
    "seed",
];

fn parse_value<V: FromStr>(line: usize, key: &str, raw: &str) -> Result<V>
where
    V::Err: fmt::Display,
{
    raw.parse().map_err(|e| Error::Parse {
        line,
        message: format!("{key}: {e}"),
    })
}

fn parse_list(line: usize, key: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(line, key, s))
        .collect()
}

fn range(key: &str, message: impl Into<String>) -> Error {
    Error::Range {
        key: key.to_string(),
        message: message.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(range(key, format!("must be positive and finite, got {v}")))
    }
}

fn within(key: &str, v: usize, min: usize, max: usize) -> Result<()> {
    if (min..=max).contains(&v) {
        Ok(())
    } else {
        Err(range(key, format!("must lie in [{min}, {max}], got {v}")))
    }
}

impl RunSpec {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_for(text, None)
    }

    /// Parses with the command supplied out of band (the CLI subcommand). A
    /// `command` key in the document must agree with it.
    pub fn parse_for(text: &str, command: Option<Command>) -> Result<Self> {
        let (mut spec, stated) = Self::parse_raw(text)?;
        if let Some(c) = command {
            if stated.is_some_and(|s| s != c) {
                return Err(Error::InvalidConfig(format!(
                    "config declares command `{}` but `{c}` was requested",
                    spec.command
                )));
            }
            spec.command = c;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn parse_raw(text: &str) -> Result<(Self, Option<Command>)> {
        let mut spec = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key `{key}`"),
                });
            };
            if seen.contains(&known) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            seen.push(known);
            if value.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: format!("{key}: missing value"),
                });
            }
            spec.assign(line, known, value)?;
        }
        let stated = seen.contains(&"command").then_some(spec.command);
        Ok((spec, stated))
    }

    fn assign(&mut self, line: usize, key: &str, v: &str) -> Result<()> {
        match key {
            "command" => self.command = parse_value(line, key, v)?,
            "energy" => self.energy = parse_value(line, key, v)?,
            "q" => self.q = parse_value(line, key, v)?,
            "viscosity" => self.viscosity = parse_value(line, key, v)?,
            "m" => self.m = parse_value(line, key, v)?,
            "dim" => self.dim = parse_value(line, key, v)?,
            "cells" => self.cells = parse_value(line, key, v)?,
            "dt" => self.dt = parse_value(line, key, v)?,
            "t_end" => self.t_end = parse_value(line, key, v)?,
            "picard_tol" => self.picard_tol = parse_value(line, key, v)?,
            "picard_max" => self.picard_max = parse_value(line, key, v)?,
            "det_floor" => self.det_floor = parse_value(line, key, v)?,
            "linear_tol" => self.linear_tol = parse_value(line, key, v)?,
            "p_norm" => self.p_norm = Some(parse_value(line, key, v)?),
            "save_every" => self.save_every = parse_value(line, key, v)?,
            "preset" => self.preset = parse_value(line, key, v)?,
            "amplitude" => self.amplitude = parse_value(line, key, v)?,
            "mode" => self.mode = parse_value(line, key, v)?,
            "rate" => self.rate = parse_value(line, key, v)?,
            "tangent" => self.tangent = parse_value(line, key, v)?,
            "f0" => self.f0 = Some(parse_list(line, key, v)?),
            "q0" => self.q0 = Some(parse_list(line, key, v)?),
            "resolution" => self.resolution = parse_value(line, key, v)?,
            "fields" => self.fields = parse_value(line, key, v)?,
            "max_modes" => self.max_modes = parse_value(line, key, v)?,
            "levels" => {
                self.levels = parse_value(line, key, v)?;
                if self.levels < 2 {
                    return Err(Error::Parse {
                        line,
                        message: "levels: a rate needs at least 2 levels".into(),
                    });
                }
            }
            "spatial_cells" => self.spatial_cells = parse_value(line, key, v)?,
            "spatial_dt" => self.spatial_dt = parse_value(line, key, v)?,
            "spatial_t_end" => self.spatial_t_end = parse_value(line, key, v)?,
            "temporal_cells" => self.temporal_cells = parse_value(line, key, v)?,
            "exact_amplitude" => self.exact_amplitude = parse_value(line, key, v)?,
            "stencil" => self.stencil = parse_value(line, key, v)?,
            "min_spatial_rate" => self.min_spatial_rate = parse_value(line, key, v)?,
            "min_temporal_rate" => self.min_temporal_rate = parse_value(line, key, v)?,
            "output" => self.output = Some(v.to_string()),
            "seed" => self.seed = parse_value(line, key, v)?,
            _ => unreachable!("key list and assignments out of sync"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.command == Command::Korn {
            within("dim", self.dim, 1, 3)?;
        } else {
            within("dim", self.dim, 1, 2)?;
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            return Err(range("q", format!("must exceed 1, got {}", self.q)));
        }
        if self.m > 4 {
            return Err(range("m", format!("must lie in [0, 4], got {}", self.m)));
        }
        within("cells", self.cells, 4, 4096)?;
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        if !(self.picard_tol >= 0.0 && self.picard_tol.is_finite()) {
            return Err(range("picard_tol", "must be nonnegative"));
        }
        within("picard_max", self.picard_max, 1, 1000)?;
        if !(self.det_floor > 0.0 && self.det_floor < 1.0) {
            return Err(range("det_floor", format!("must lie in (0, 1), got {}", self.det_floor)));
        }
        if !(self.linear_tol > 0.0 && self.linear_tol < 1.0) {
            return Err(range("linear_tol", format!("must lie in (0, 1), got {}", self.linear_tol)));
        }
        if let Some(p) = self.p_norm {
            if !(p > (self.dim + 2) as f64 && p.is_finite()) {
                return Err(range("p_norm", format!("must exceed dim + 2 = {}, got {p}", self.dim + 2)));
            }
        }
        within("save_every", self.save_every, 1, usize::MAX)?;
        if !self.amplitude.is_finite() {
            return Err(range("amplitude", "must be finite"));
        }
        if self.mode < 1 {
            return Err(range("mode", "must be at least 1"));
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(range("rate", "must be nonnegative and finite"));
        }
        for (key, value) in [("f0", &self.f0), ("q0", &self.q0)] {
            if let Some(v) = value {
                if v.len() != self.dim * self.dim {
                    return Err(range(key, format!("needs {} entries, got {}", self.dim * self.dim, v.len())));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(range(key, "entries must be finite"));
                }
            }
        }
        within("resolution", self.resolution, 8, 100_000)?;
        within("fields", self.fields, 1, 1_000_000)?;
        within("max_modes", self.max_modes, 1, 16)?;
        within("levels", self.levels, 2, 8)?;
        within("spatial_cells", self.spatial_cells, 4, 4096)?;
        positive("spatial_dt", self.spatial_dt)?;
        positive("spatial_t_end", self.spatial_t_end)?;
        within("temporal_cells", self.temporal_cells, 4, 4096)?;
        if !(self.exact_amplitude.abs() < 0.1) {
            return Err(range("exact_amplitude", "must lie in (-0.1, 0.1)"));
        }
        for (key, v) in [("min_spatial_rate", self.min_spatial_rate), ("min_temporal_rate", self.min_temporal_rate)] {
            if !v.is_finite() {
                return Err(range(key, "must be finite"));
            }
        }
        Ok(())
    }

    /// Writes every key that differs from "unset"; the result reparses to an
    /// equal spec.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("command", self.command.to_string());
        put("energy", self.energy.to_string());
        put("q", format!("{:?}", self.q));
        put("viscosity", self.viscosity.to_string());
        put("m", self.m.to_string());
        put("dim", self.dim.to_string());
        put("cells", self.cells.to_string());
        put("dt", format!("{:?}", self.dt));
        put("t_end", format!("{:?}", self.t_end));
        put("picard_tol", format!("{:?}", self.picard_tol));
        put("picard_max", self.picard_max.to_string());
        put("det_floor", format!("{:?}", self.det_floor));
        put("linear_tol", format!("{:?}", self.linear_tol));
        if let Some(p) = self.p_norm {
            put("p_norm", format!("{p:?}"));
        }
        put("save_every", self.save_every.to_string());
        put("preset", self.preset.to_string());
        put("amplitude", format!("{:?}", self.amplitude));
        put("mode", self.mode.to_string());
        put("rate", format!("{:?}", self.rate));
        put("tangent", self.tangent.to_string());
        if let Some(v) = &self.f0 {
            put("f0", list(v));
        }
        if let Some(v) = &self.q0 {
            put("q0", list(v));
        }
        put("resolution", self.resolution.to_string());
        put("fields", self.fields.to_string());
        put("max_modes", self.max_modes.to_string());
        put("levels", self.levels.to_string());
        put("spatial_cells", self.spatial_cells.to_string());
        put("spatial_dt", format!("{:?}", self.spatial_dt));
        put("spatial_t_end", format!("{:?}", self.spatial_t_end));
        put("temporal_cells", self.temporal_cells.to_string());
        put("exact_amplitude", format!("{:?}", self.exact_amplitude));
        put("stencil", self.stencil.to_string());
        put("min_spatial_rate", format!("{:?}", self.min_spatial_rate));
        put("min_temporal_rate", format!("{:?}", self.min_temporal_rate));
        if let Some(o) = &self.output {
            put("output", o.clone());
        }
        put("seed", self.seed.to_string());
        out
    }

    pub fn p_norm(&self) -> f64 {
        self.p_norm.unwrap_or((self.dim + 3) as f64)
    }

    pub fn viscosity_model(&self) -> ViscosityModel {
        match self.viscosity {
            ViscosityKind::Z0DoublePrime => ViscosityModel::Z0DoublePrime,
            ViscosityKind::Z0Prime => ViscosityModel::Z0Prime,
            ViscosityKind::Zm => ViscosityModel::Zm { m: self.m },
        }
    }

    pub fn model(&self) -> Result<ConstitutiveModel<f64>> {
        let energy = match self.energy {
            EnergyKind::W0 => EnergyModel::W0,
            EnergyKind::W1 => EnergyModel::W1 { q: self.q },
            EnergyKind::W2 => EnergyModel::W2 { q: self.q },
        };
        ConstitutiveModel::new(energy, self.viscosity_model())
    }

    pub fn solver_config(&self) -> SolverConfig<f64> {
        SolverConfig {
            dt: self.dt,
            t_end: self.t_end,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
            det_floor: self.det_floor,
            linear_tol: self.linear_tol,
            p_norm: self.p_norm(),
            save_every: self.save_every,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let spec = RunSpec::parse("command = korn\nviscosity = Zm\n").unwrap();
        assert_eq!(
            spec,
            RunSpec {
                command: Command::Korn,
                viscosity: ViscosityKind::Zm,
                ..RunSpec::default()
            }
        );
        assert_eq!(spec.p_norm(), 4.0);
    }

    #[test]
    fn comments_blank_lines_and_case() {
        let text = "# header\n\n  command = SIMULATE  # trailing\ndim=2\ncells = 16\n";
        let spec = RunSpec::parse(text).unwrap();
        assert_eq!(spec.command, Command::Simulate);
        assert_eq!((spec.dim, spec.cells), (2, 16));
    }

    #[test]
    fn grammar_errors_carry_line_numbers() {
        let cases = [
            ("dt = 1e-3\ndt = 2e-3\n", 2),
            ("\nbogus = 1\n", 2),
            ("dim = 2\nno equals sign\n", 2),
            ("cells = many\n", 1),
            ("levels = 1\n", 1),
            ("preset = spiral\n", 1),
            ("dt =\n", 1),
        ];
        for (text, expect) in cases {
            match RunSpec::parse(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, expect, "{text}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn range_errors_name_the_key() {
        let cases = [
            ("dim = 2\np_norm = 2\n", "p_norm"),
            ("dim = 1\np_norm = 3\n", "p_norm"),
            ("cells = 3\n", "cells"),
            ("dt = -1\n", "dt"),
            ("dim = 3\n", "dim"),
            ("energy = W1\nq = 1\n", "q"),
            ("det_floor = 1.5\n", "det_floor"),
            ("dim = 2\nf0 = 1 0 0\n", "f0"),
        ];
        for (text, expect) in cases {
            match RunSpec::parse(text) {
                Err(Error::Range { key, .. }) => assert_eq!(key, expect, "{text}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
        assert!(RunSpec::parse("command = korn\ndim = 3\n").is_ok());
        assert!(RunSpec::parse("dim = 2\np_norm = 4.5\n").is_ok());
    }

    #[test]
    fn serialize_roundtrips() {
        let spec = RunSpec {
            command: Command::Korn,
            energy: EnergyKind::W2,
            q: 2.5,
            dim: 2,
            dt: 0.1 + 0.2,
            p_norm: Some(4.25),
            f0: Some(vec![1.1, 0.2, -0.3, 0.9]),
            q0: Some(vec![0.0, 1.0, 1e-17, 2.0]),
            output: Some("runs/a b".into()),
            seed: u64::MAX,
            ..RunSpec::default()
        };
        assert_eq!(RunSpec::parse(&spec.serialize()).unwrap(), spec);
        let d = RunSpec::default();
        assert_eq!(RunSpec::parse(&d.serialize()).unwrap(), d);
    }
}
