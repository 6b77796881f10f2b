use sha2::{Digest, Sha256};

/// Consumers of randomness in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Subset,
    Split,
    Weights,
    Smo,
    LogReg,
    RbfSubsample,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::Subset => "subset",
            Stage::Split => "split",
            Stage::Weights => "weights",
            Stage::Smo => "smo",
            Stage::LogReg => "logreg",
            Stage::RbfSubsample => "rbf_subsample",
        }
    }
}

/// First eight bytes (little endian) of `SHA-256("hqids/<master>/<stage>")`.
pub fn derive_seed(master: u64, stage: Stage) -> u64 {
    let digest = Sha256::digest(format!("hqids/{master}/{}", stage.label()).as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_and_stable() {
        let all = [
            Stage::Subset,
            Stage::Split,
            Stage::Weights,
            Stage::Smo,
            Stage::LogReg,
            Stage::RbfSubsample,
        ];
        let seeds: Vec<u64> = all.iter().map(|&s| derive_seed(42, s)).collect();
        for i in 0..seeds.len() {
            for j in i + 1..seeds.len() {
                assert_ne!(seeds[i], seeds[j]);
            }
        }
        assert_eq!(derive_seed(42, Stage::Subset), derive_seed(42, Stage::Subset));
        assert_ne!(derive_seed(42, Stage::Subset), derive_seed(43, Stage::Subset));
    }
}
