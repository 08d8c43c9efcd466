//! BIP-340 Schnorr keys and signatures for relay receipts.

use core::fmt;

use k256::schnorr::{Signature, SigningKey, VerifyingKey};
use rand_core::RngCore;

/// Relay identity: a 32-byte BIP-340 x-only public key.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeId(pub [u8; 32]);

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("NodeId(")?;
        for b in &self.0[..4] {
            write!(f, "{b:02x}")?;
        }
        f.write_str("..)")
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigningError {
    /// Secret is zero or not below the curve order.
    InvalidKey,
    SigningFailed,
}

impl fmt::Display for SigningError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigningError::InvalidKey => f.write_str("invalid secp256k1 secret key"),
            SigningError::SigningFailed => f.write_str("schnorr signing failed"),
        }
    }
}

/// A relay's signing key and its x-only public key.
#[derive(Clone)]
pub struct RelayKeypair {
    secret: SigningKey,
    public: NodeId,
}

impl fmt::Debug for RelayKeypair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RelayKeypair").field("public", &self.public).finish_non_exhaustive()
    }
}

impl RelayKeypair {
    pub fn from_secret_bytes(secret: &[u8; 32]) -> Result<Self, SigningError> {
        let secret = SigningKey::from_bytes(secret).map_err(|_| SigningError::InvalidKey)?;
        let public = NodeId(secret.verifying_key().to_bytes().into());
        Ok(RelayKeypair { secret, public })
    }

    /// Draws 32-byte candidates from `rng` until one is a valid scalar.
    ///
    /// The caller decides whether the source is cryptographically strong; the
    /// simulator deliberately uses a seeded generator.
    pub fn generate<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut candidate = [0u8; 32];
            rng.fill_bytes(&mut candidate);
            if let Ok(kp) = Self::from_secret_bytes(&candidate) {
                return kp;
            }
        }
    }

    pub fn public(&self) -> NodeId {
        self.public
    }

    pub fn secret_bytes(&self) -> [u8; 32] {
        self.secret.to_bytes().into()
    }
}

/// Signs `msg` (a receipt signing message) with BIP-340 and caller-chosen
/// auxiliary randomness.
pub fn sign_receipt(
    msg: &[u8],
    key: &RelayKeypair,
    aux_rand: &[u8; 32],
) -> Result<[u8; 64], SigningError> {
    let sig = key.secret.sign_raw(msg, aux_rand).map_err(|_| SigningError::SigningFailed)?;
    Ok(sig.to_bytes())
}

/// BIP-340 verification. Malformed keys and signatures yield `false`.
pub fn verify_signature(msg: &[u8], sig: &[u8; 64], node: &NodeId) -> bool {
    let Ok(vk) = VerifyingKey::from_bytes(&node.0) else {
        return false;
    };
    let Ok(sig) = Signature::try_from(sig.as_slice()) else {
        return false;
    };
    vk.verify_raw(msg, &sig).is_ok()
}

/// True when `node` decodes to a point on the curve.
pub fn is_valid_node_id(node: &NodeId) -> bool {
    VerifyingKey::from_bytes(&node.0).is_ok()
}
