use sha2::{Digest, Sha256};

use super::SimState;

/// Digest of a state with no particles on a zero-sized lattice.
pub const EMPTY_DIGEST: &str = "d89e047b93e3f43eb5b01c8e131565fd4a2ee48d4af4b7d585ffbaa06c49b0d9";

/// Hex SHA-256 over the particle multiset and the chemoattractant lattice.
///
/// Particles are hashed in sorted order, so the digest does not depend on
/// the order of the particle list. Floats are hashed by bit pattern.
pub fn state_digest(state: &SimState) -> String {
    digest_parts(
        state.width(),
        state.height(),
        state.particles.iter().map(|p| (p.cell, p.x, p.y, p.heading, p.moved)),
        &state.chemo,
    )
}

pub(crate) fn digest_parts(
    width: usize,
    height: usize,
    particles: impl Iterator<Item = (usize, f64, f64, f64, bool)>,
    chemo: &[f64],
) -> String {
    let mut recs: Vec<(u64, u64, u64, u64, u8)> = particles
        .map(|(c, x, y, h, m)| (c as u64, x.to_bits(), y.to_bits(), h.to_bits(), m as u8))
        .collect();
    recs.sort_unstable();

    let mut h = Sha256::new();
    h.update(b"physarum-state-v1");
    h.update((width as u64).to_le_bytes());
    h.update((height as u64).to_le_bytes());
    h.update((recs.len() as u64).to_le_bytes());
    for (c, x, y, hd, m) in recs {
        h.update(c.to_le_bytes());
        h.update(x.to_le_bytes());
        h.update(y.to_le_bytes());
        h.update(hd.to_le_bytes());
        h.update([m]);
    }
    for v in chemo {
        h.update(v.to_bits().to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_constant() {
        assert_eq!(digest_parts(0, 0, std::iter::empty(), &[]), EMPTY_DIGEST);
    }

    #[test]
    fn particle_order_is_irrelevant() {
        let a = [(1, 1.0, 0.0, 10.0, true), (5, 1.0, 1.0, 20.0, false)];
        let mut b = a;
        b.reverse();
        let chemo = [0.0; 9];
        assert_eq!(
            digest_parts(3, 3, a.into_iter(), &chemo),
            digest_parts(3, 3, b.into_iter(), &chemo)
        );
    }

    #[test]
    fn chemo_change_is_visible() {
        let mut chemo = [0.0; 9];
        let before = digest_parts(3, 3, std::iter::empty(), &chemo);
        chemo[4] = 1e-12;
        assert_ne!(before, digest_parts(3, 3, std::iter::empty(), &chemo));
    }
}
