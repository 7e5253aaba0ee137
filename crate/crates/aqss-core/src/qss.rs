//! Threshold QSS schemes, attack models, authorized-set enumeration, and the
//! per-set effective channels: the forward map
//! `N_A = tr_Abar ∘ Z ∘ E` from the secret to the authorized shares, and its
//! complement `Nhat_A` to everything the adversary holds.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use crate::channels::{complementary, compose, trace_out_channel, KrausChannel};
use crate::error::{Error, Result};
use crate::numkernel::{cr, CMat, TP_TOL};

/// Largest total share-space dimension `d^n` accepted by the dense backend.
pub const MAX_TOTAL_DIM: usize = 729;

/// A `(t, n)` threshold scheme with a `q`-dimensional secret encoded into `n`
/// `d`-dimensional shares by a single isometric Kraus operator.
#[derive(Debug, Clone)]
pub struct ThresholdScheme {
    t: usize,
    n: usize,
    secret_dim: usize,
    share_dim: usize,
    encoder: KrausChannel,
}

impl ThresholdScheme {
    pub fn new(
        t: usize,
        n: usize,
        secret_dim: usize,
        share_dim: usize,
        encoder: KrausChannel,
    ) -> Result<Self> {
        if t == 0 || t > n {
            return Err(Error::InvalidParameter(alloc::format!(
                "threshold must satisfy 1 <= t <= n, got t={t}, n={n}"
            )));
        }
        let total = share_dim.checked_pow(n as u32).ok_or(Error::DimensionGuard {
            dim: usize::MAX,
            max: MAX_TOTAL_DIM,
        })?;
        if total > MAX_TOTAL_DIM {
            return Err(Error::DimensionGuard { dim: total, max: MAX_TOTAL_DIM });
        }
        if encoder.dim_in() != secret_dim || encoder.dim_out() != total {
            return Err(Error::DimMismatch {
                left: encoder.dim_out(),
                right: total,
                context: "encoder dimensions",
            });
        }
        if encoder.kraus_count() != 1 {
            return Err(Error::InvalidParameter(String::from(
                "encoder must be an isometry with exactly one Kraus operator",
            )));
        }
        let v = &encoder.kraus_ops()[0];
        let defect = v.dagger().mul_mat(v).sub_mat(&CMat::identity(secret_dim)).frobenius_norm();
        if defect > TP_TOL {
            return Err(Error::NotTracePreserving { residual: defect });
        }
        Ok(Self { t, n, secret_dim, share_dim, encoder })
    }

    pub fn threshold(&self) -> usize {
        self.t
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn secret_dim(&self) -> usize {
        self.secret_dim
    }

    pub fn share_dim(&self) -> usize {
        self.share_dim
    }

    pub fn total_dim(&self) -> usize {
        self.share_dim.pow(self.n as u32)
    }

    pub fn encoder(&self) -> &KrausChannel {
        &self.encoder
    }

    pub fn encoding_isometry(&self) -> &CMat {
        &self.encoder.kraus_ops()[0]
    }

    pub fn share_dims(&self) -> Vec<usize> {
        vec![self.share_dim; self.n]
    }
}

/// The `((2,3))` qutrit threshold scheme, the standard reference instance:
/// `|0> -> (|000> + |111> + |222>)/sqrt(3)`,
/// `|1> -> (|012> + |120> + |201>)/sqrt(3)`,
/// `|2> -> (|021> + |102> + |210>)/sqrt(3)`.
pub fn build_cgl_2_3_scheme() -> ThresholdScheme {
    let w = cr(1.0 / sqrt(3.0));
    let mut v = CMat::zeros(27, 3);
    let cols: [[usize; 3]; 3] = [
        [idx3(0, 0, 0), idx3(1, 1, 1), idx3(2, 2, 2)],
        [idx3(0, 1, 2), idx3(1, 2, 0), idx3(2, 0, 1)],
        [idx3(0, 2, 1), idx3(1, 0, 2), idx3(2, 1, 0)],
    ];
    for (s, rows) in cols.iter().enumerate() {
        for &r in rows {
            v.set(r, s, w);
        }
    }
    let encoder = KrausChannel::isometry(v).expect("cgl(2,3) encoder is isometric");
    ThresholdScheme::new(2, 3, 3, 3, encoder).expect("cgl(2,3) dimensions are valid")
}

fn idx3(a: usize, b: usize, c: usize) -> usize {
    (a * 3 + b) * 3 + c
}

/// Global CPTP attack on all `n` shares, with a descriptive label and the
/// parameter values that produced it.
#[derive(Debug, Clone)]
pub struct AttackModel {
    channel: KrausChannel,
    label: String,
    parameters: Vec<(String, f64)>,
}

impl AttackModel {
    pub fn new(
        channel: KrausChannel,
        label: String,
        parameters: Vec<(String, f64)>,
    ) -> Result<Self> {
        if channel.dim_in() != channel.dim_out() {
            return Err(Error::DimMismatch {
                left: channel.dim_in(),
                right: channel.dim_out(),
                context: "attack must map the share space to itself",
            });
        }
        // Complete positivity is structural for Kraus-represented channels;
        // checking it would eigendecompose a (d^n)^2-dimensional Choi matrix.
        let residual = channel.trace_preservation_residual();
        if residual > crate::numkernel::TP_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self { channel, label, parameters })
    }

    pub fn identity(total_dim: usize) -> Self {
        Self {
            channel: KrausChannel::identity(total_dim),
            label: String::from("identity"),
            parameters: Vec::new(),
        }
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn parameters(&self) -> &[(String, f64)] {
        &self.parameters
    }
}

/// Tensor-product attack from one channel per share.
pub fn product_attack(per_share: &[KrausChannel], label: String) -> Result<AttackModel> {
    let first = per_share.first().ok_or(Error::InvalidParameter(String::from(
        "product attack needs at least one share channel",
    )))?;
    let d = first.dim_in();
    for ch in per_share {
        if ch.dim_in() != d || ch.dim_out() != d {
            return Err(Error::DimMismatch {
                left: d,
                right: ch.dim_in(),
                context: "product attack share dims",
            });
        }
    }
    let mut kraus = vec![CMat::identity(1)];
    for ch in per_share {
        let mut next = Vec::with_capacity(kraus.len() * ch.kraus_count());
        for acc in &kraus {
            for k in ch.kraus_ops() {
                next.push(acc.kron(k));
            }
        }
        kraus = next;
    }
    let channel = KrausChannel::new(kraus)?;
    AttackModel::new(channel, label, Vec::new())
}

/// Subset of players, stored 0-based ascending; shown 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorizedSet {
    members: Vec<usize>,
}

impl AuthorizedSet {
    pub fn new(mut members: Vec<usize>, n: usize) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.iter().any(|&m| m >= n) {
            return Err(Error::BadIndexSet { reason: "player index out of range" });
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|i| !self.members.contains(i)).collect()
    }
}

impl core::fmt::Display for AuthorizedSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", m + 1)?;
        }
        write!(f, "}}")
    }
}

/// All subsets of size exactly `t`, lexicographic.
pub fn min_authorized_sets(scheme: &ThresholdScheme) -> Vec<AuthorizedSet> {
    subsets_of_size(scheme.n, scheme.t)
}

/// All subsets of size `>= t`, lexicographic within each size.
pub fn all_authorized_sets(scheme: &ThresholdScheme) -> Vec<AuthorizedSet> {
    let mut out = Vec::new();
    for size in scheme.t..=scheme.n {
        out.extend(subsets_of_size(scheme.n, size));
    }
    out
}

fn subsets_of_size(n: usize, k: usize) -> Vec<AuthorizedSet> {
    fn rec(
        start: usize,
        n: usize,
        k: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<AuthorizedSet>,
    ) {
        if current.len() == k {
            out.push(AuthorizedSet { members: current.clone() });
            return;
        }
        for i in start..n {
            if n - i < k - current.len() {
                break;
            }
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    rec(0, n, k, &mut current, &mut out);
    out
}

/// The per-set channel pair: `forward` is the secret-to-authorized-shares map
/// (Kraus-minimal), `complement` its complementary channel to everything the
/// adversary holds.
#[derive(Debug, Clone)]
pub struct EffectiveChannels {
    pub forward: KrausChannel,
    pub complement: KrausChannel,
}

/// Assemble `N_A = tr_Abar ∘ Z ∘ E` and its complement for an authorized set.
/// The forward channel is reduced to minimal Kraus rank before complementing,
/// keeping the adversary register small; complements are unique up to an
/// isometry on that register.
pub fn effective_channels(
    scheme: &ThresholdScheme,
    attack: &AttackModel,
    set: &AuthorizedSet,
) -> Result<EffectiveChannels> {
    if set.size() < scheme.t {
        return Err(Error::Unauthorized { size: set.size(), threshold: scheme.t });
    }
    if attack.channel().dim_in() != scheme.total_dim() {
        return Err(Error::DimMismatch {
            left: attack.channel().dim_in(),
            right: scheme.total_dim(),
            context: "attack vs scheme share space",
        });
    }
    let complement_players = set.complement(scheme.n);
    let attacked = compose(attack.channel(), scheme.encoder())?;
    let forward = if complement_players.is_empty() {
        attacked
    } else {
        let discard = trace_out_channel(&scheme.share_dims(), &complement_players)?;
        compose(&discard, &attacked)?
    };
    let forward = forward.reduced()?;
    let complement = complementary(&forward);
    Ok(EffectiveChannels { forward, complement })
}
