use revfrf_crypto::wire::{put_bytes, Reader};
use revfrf_crypto::Ciphertext;
use revfrf_forest::{Forest, ForestError, SplitCodec};

/// A stored threshold: encrypted under its provider's key, with the
/// provider's token over the node it was won at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncryptedSplit {
    pub ciphertext: Ciphertext,
    pub token: Vec<u8>,
}

impl SplitCodec for EncryptedSplit {
    fn encode_split(&self, out: &mut Vec<u8>) {
        self.ciphertext.encode(out);
        put_bytes(out, &self.token);
    }

    fn decode_split(r: &mut Reader<'_>) -> Result<Self, ForestError> {
        let ciphertext = Ciphertext::decode(r)?;
        let token = r.bytes()?.to_vec();
        Ok(Self { ciphertext, token })
    }
}

pub type EncryptedForest = Forest<EncryptedSplit>;
