use std::fmt;

use crate::Real;

use super::HomogenizationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    Gaussian,
    /// `exp(1 − 1/(1 − r²))` for `r < 1`, zero outside.
    Bump,
}

/// Slow envelope `χ(x)` centred at `(cx, cz)` with radius or width `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope<T> {
    pub kind: EnvelopeKind,
    pub cx: T,
    pub cz: T,
    pub w: T,
}

impl<T: Real> Envelope<T> {
    pub fn bump(cx: T, cz: T, w: T) -> Self {
        Envelope {
            kind: EnvelopeKind::Bump,
            cx,
            cz,
            w,
        }
    }

    pub fn gaussian(cx: T, cz: T, w: T) -> Self {
        Envelope {
            kind: EnvelopeKind::Gaussian,
            cx,
            cz,
            w,
        }
    }

    fn r2(&self, x: T, z: T) -> T {
        let (a, b) = ((x - self.cx) / self.w, (z - self.cz) / self.w);
        a * a + b * b
    }

    pub fn value(&self, x: T, z: T) -> T {
        let r2 = self.r2(x, z);
        match self.kind {
            EnvelopeKind::Gaussian => (-r2).exp(),
            EnvelopeKind::Bump if r2 < T::one() => (T::one() - T::one() / (T::one() - r2)).exp(),
            EnvelopeKind::Bump => T::zero(),
        }
    }

    /// `(∂χ/∂x, ∂χ/∂z)`.
    pub fn gradient(&self, x: T, z: T) -> (T, T) {
        let r2 = self.r2(x, z);
        let d = match self.kind {
            EnvelopeKind::Gaussian => -(-r2).exp(),
            EnvelopeKind::Bump if r2 < T::one() => {
                let s = T::one() - r2;
                -self.value(x, z) / (s * s)
            }
            EnvelopeKind::Bump => T::zero(),
        };
        let two = T::lit(2.0) / (self.w * self.w);
        (d * two * (x - self.cx), d * two * (z - self.cz))
    }
}

/// Unit-periodic fast profile in `y = (y₁, y₂)` with integer wavenumbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YProfile {
    Const,
    Cos(i32, i32),
    Sin(i32, i32),
    /// Continuous, piecewise-linear zero-mean triangle wave in `k·y`.
    Tri(i32, i32),
}

impl YProfile {
    pub fn value<T: Real>(&self, y1: T, y2: T) -> T {
        let phase = |k1: i32, k2: i32| T::lit(k1 as f64) * y1 + T::lit(k2 as f64) * y2;
        match *self {
            YProfile::Const => T::one(),
            YProfile::Cos(a, b) => (T::two_pi() * phase(a, b)).cos(),
            YProfile::Sin(a, b) => (T::two_pi() * phase(a, b)).sin(),
            YProfile::Tri(a, b) => {
                let s = phase(a, b);
                let f = s - s.floor();
                T::one() - T::lit(4.0) * (f - T::lit(0.5)).magnitude()
            }
        }
    }

    /// Average over the unit cell.
    pub fn mean(&self) -> f64 {
        match *self {
            YProfile::Const => 1.0,
            YProfile::Cos(0, 0) => 1.0,
            YProfile::Tri(0, 0) => -1.0,
            _ => 0.0,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(
            self,
            YProfile::Const | YProfile::Cos(0, 0) | YProfile::Tri(0, 0) | YProfile::Sin(0, 0)
        )
    }
}

/// Which scalar a test function is paired with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    U1,
    U2,
    Theta,
}

impl Target {
    pub fn as_str(&self) -> &'static str {
        match self {
            Target::U1 => "u1",
            Target::U2 => "u2",
            Target::Theta => "theta",
        }
    }
}

/// Separable test function `φ(x, y, τ) = χ(x)·Y(y)·τⁿ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction<T> {
    pub target: Target,
    pub chi: Envelope<T>,
    pub y: YProfile,
    pub tau_pow: Option<u32>,
}

impl<T: Real> TestFunction<T> {
    pub fn new(target: Target, chi: Envelope<T>, y: YProfile) -> Self {
        TestFunction {
            target,
            chi,
            y,
            tau_pow: None,
        }
    }

    pub fn with_tau_pow(mut self, n: u32) -> Self {
        self.tau_pow = Some(n);
        self
    }

    pub fn tau_factor(&self, tau: T) -> T {
        match self.tau_pow {
            Some(n) => tau.powi(n as i32),
            None => T::one(),
        }
    }

    pub fn eval(&self, x: T, z: T, y1: T, y2: T, tau: T) -> T {
        self.chi.value(x, z) * self.y.value(y1, y2) * self.tau_factor(tau)
    }

    /// `∫_{T²} φ dy`, the y-independent part.
    pub fn eval_cell_mean(&self, x: T, z: T, tau: T) -> T {
        self.chi.value(x, z) * T::lit(self.y.mean()) * self.tau_factor(tau)
    }

    pub fn is_y_independent(&self) -> bool {
        self.y.is_constant()
    }

    /// Parses one DSL line:
    /// `<u1|u2|theta> chi:<gaussian|bump> cx,cz,w * y:<cos|sin|tri> k1,k2 [* tau:poly n]`
    /// where `y:const` takes no arguments.
    pub fn parse(line: &str) -> Result<Self, String> {
        let mut parts = line.split('*').map(str::trim);
        let head = parts.next().ok_or("empty line")?;
        let mut words = head.split_whitespace();
        let target = match words.next() {
            Some("u1") => Target::U1,
            Some("u2") => Target::U2,
            Some("theta") => Target::Theta,
            other => return Err(format!("unknown field {other:?}")),
        };
        let kind = match words.next() {
            Some("chi:gaussian") => EnvelopeKind::Gaussian,
            Some("chi:bump") => EnvelopeKind::Bump,
            other => return Err(format!("expected chi:<gaussian|bump>, found {other:?}")),
        };
        let nums = floats(words.next().ok_or("missing cx,cz,w")?, 3)?;
        if words.next().is_some() {
            return Err("trailing tokens after chi".into());
        }
        if !(nums[2] > 0.0) {
            return Err("chi width must be positive".into());
        }
        let chi = Envelope {
            kind,
            cx: T::lit(nums[0]),
            cz: T::lit(nums[1]),
            w: T::lit(nums[2]),
        };
        let mut y = None;
        let mut tau_pow = None;
        for part in parts {
            let mut w = part.split_whitespace();
            match w.next() {
                Some("y:const") => y = Some(YProfile::Const),
                Some(k @ ("y:cos" | "y:sin" | "y:tri")) => {
                    let ks = ints(w.next().ok_or("missing k1,k2")?)?;
                    y = Some(match k {
                        "y:cos" => YProfile::Cos(ks.0, ks.1),
                        "y:sin" => YProfile::Sin(ks.0, ks.1),
                        _ => YProfile::Tri(ks.0, ks.1),
                    });
                }
                Some("tau:poly") => {
                    let n = w.next().ok_or("missing tau power")?;
                    tau_pow = Some(n.parse::<u32>().map_err(|_| format!("bad tau power {n:?}"))?);
                }
                other => return Err(format!("unknown factor {other:?}")),
            }
            if w.next().is_some() {
                return Err(format!("trailing tokens in {part:?}"));
            }
        }
        let y = y.ok_or("missing y factor")?;
        Ok(TestFunction {
            target,
            chi,
            y,
            tau_pow,
        })
    }
}

fn floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Result<Vec<f64>, _> = s.split(',').map(str::parse::<f64>).collect();
    match v {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(format!("expected {n} comma-separated numbers, found {s:?}")),
    }
}

fn ints(s: &str) -> Result<(i32, i32), String> {
    let v: Vec<&str> = s.split(',').collect();
    match v.as_slice() {
        [a, b] => Ok((
            a.parse().map_err(|_| format!("bad integer {a:?}"))?,
            b.parse().map_err(|_| format!("bad integer {b:?}"))?,
        )),
        _ => Err(format!("expected k1,k2, found {s:?}")),
    }
}

impl<T: Real> fmt::Display for TestFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.chi.kind {
            EnvelopeKind::Gaussian => "gaussian",
            EnvelopeKind::Bump => "bump",
        };
        write!(
            f,
            "{} chi:{kind} {:?},{:?},{:?} * ",
            self.target.as_str(),
            self.chi.cx.as_f64(),
            self.chi.cz.as_f64(),
            self.chi.w.as_f64()
        )?;
        match self.y {
            YProfile::Const => write!(f, "y:const")?,
            YProfile::Cos(a, b) => write!(f, "y:cos {a},{b}")?,
            YProfile::Sin(a, b) => write!(f, "y:sin {a},{b}")?,
            YProfile::Tri(a, b) => write!(f, "y:tri {a},{b}")?,
        }
        if let Some(n) = self.tau_pow {
            write!(f, " * tau:poly {n}")?;
        }
        Ok(())
    }
}

/// Parses a φ file: one function per line, `#` comments and blank lines
/// ignored.
pub fn parse_phi_file<T: Real>(text: &str) -> Result<Vec<TestFunction<T>>, HomogenizationError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(TestFunction::parse(line).map_err(|msg| HomogenizationError::Parse { line: n + 1, msg })?);
    }
    Ok(out)
}
