use serde::{Deserialize, Serialize};

pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TracerLabel {
    LargeScale,
    SmallScale,
    ConePlus,
    ConeMinus,
    VCloud,
    Custom,
}

impl TracerLabel {
    pub const ALL: [TracerLabel; 6] = [
        TracerLabel::LargeScale,
        TracerLabel::SmallScale,
        TracerLabel::ConePlus,
        TracerLabel::ConeMinus,
        TracerLabel::VCloud,
        TracerLabel::Custom,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TracerLabel::LargeScale => "large_scale",
            TracerLabel::SmallScale => "small_scale",
            TracerLabel::ConePlus => "cone_plus",
            TracerLabel::ConeMinus => "cone_minus",
            TracerLabel::VCloud => "v_cloud",
            TracerLabel::Custom => "custom",
        }
    }

    pub fn code(&self) -> u8 {
        Self::ALL.iter().position(|l| l == self).unwrap() as u8
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Self::ALL.get(c as usize).copied()
    }
}

/// A Lagrangian marker. Positions are kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tracer {
    pub x0: [f64; 2],
    pub x: [f64; 2],
    /// Deformation gradient `J = D Phi`.
    pub j: Mat2,
    pub label: TracerLabel,
}

impl Tracer {
    pub fn new(x0: [f64; 2], label: TracerLabel) -> Self {
        Self {
            x0,
            x: x0,
            j: IDENTITY,
            label,
        }
    }

    pub fn det(&self) -> f64 {
        self.j[0][0] * self.j[1][1] - self.j[0][1] * self.j[1][0]
    }

    /// `T^T J T`, the directional stretch `d_T (Phi . T)`.
    pub fn stretch(&self, t: [f64; 2]) -> f64 {
        let jt = [
            self.j[0][0] * t[0] + self.j[0][1] * t[1],
            self.j[1][0] * t[0] + self.j[1][1] * t[1],
        ];
        t[0] * jt[0] + t[1] * jt[1]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TracerSet {
    pub tracers: Vec<Tracer>,
}

impl TracerSet {
    pub fn new(tracers: Vec<Tracer>) -> Self {
        Self { tracers }
    }

    pub fn len(&self) -> usize {
        self.tracers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tracer> {
        self.tracers.iter()
    }

    pub fn with_label(&self, label: TracerLabel) -> impl Iterator<Item = &Tracer> {
        self.tracers.iter().filter(move |t| t.label == label)
    }

    pub fn extend(&mut self, other: TracerSet) {
        self.tracers.extend(other.tracers);
    }

    /// Largest `|det J - 1|` over the set.
    pub fn max_det_error(&self) -> f64 {
        self.tracers
            .iter()
            .fold(0.0, |m, t| m.max((t.det() - 1.0).abs()))
    }

    const RECORD: usize = 1 + 8 * 8;

    /// Little-endian binary encoding used in checkpoints.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.len() * Self::RECORD);
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for t in &self.tracers {
            out.push(t.label.code());
            for v in [
                t.x0[0], t.x0[1], t.x[0], t.x[1], t.j[0][0], t.j[0][1], t.j[1][0], t.j[1][1],
            ] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<Self> {
        let count = u64::from_le_bytes(bytes.get(..8)?.try_into().ok()?) as usize;
        let body = &bytes[8..];
        if body.len() != count.checked_mul(Self::RECORD)? {
            return None;
        }
        let mut tracers = Vec::with_capacity(count);
        for rec in body.chunks_exact(Self::RECORD) {
            let label = TracerLabel::from_code(rec[0])?;
            let mut v = [0.0; 8];
            for (k, c) in rec[1..].chunks_exact(8).enumerate() {
                v[k] = f64::from_le_bytes(c.try_into().ok()?);
            }
            tracers.push(Tracer {
                x0: [v[0], v[1]],
                x: [v[2], v[3]],
                j: [[v[4], v[5]], [v[6], v[7]]],
                label,
            });
        }
        Some(Self { tracers })
    }
}
