use rdalloc::{InstanceFile, Result, TableLayout};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Output of `solve`. Everything except `wall_time_ms` is a pure function
/// of the instance and the parameters.
#[derive(Debug, Serialize)]
pub struct RunReport {
    /// `sha256:` of the instance in canonical (records layout, compact) JSON.
    pub instance_digest: String,
    pub method: &'static str,
    pub parameters: serde_json::Value,
    pub result: serde_json::Value,
    pub counters: serde_json::Value,
    pub wall_time_ms: f64,
}

/// Content hash independent of the file's layout and whitespace.
pub fn instance_digest(file: &InstanceFile) -> Result<String> {
    let canonical = InstanceFile::from_tables(&file.to_tables::<f64>()?, TableLayout::Records)?;
    let bytes = serde_json::to_vec(&canonical)?;
    Ok(format!("sha256:{}", hex::encode(Sha256::digest(bytes))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rdalloc::gen_synthetic;
    use rdalloc::Profile;

    #[test]
    fn digest_ignores_layout() {
        let inst = gen_synthetic::<f64>(4, 2, 3, Profile::Convex).unwrap();
        let a = InstanceFile::from_instance(&inst, TableLayout::Records).unwrap();
        let b = InstanceFile::from_instance(&inst, TableLayout::Dense).unwrap();
        let da = instance_digest(&a).unwrap();
        assert_eq!(da, instance_digest(&b).unwrap());
        assert!(da.starts_with("sha256:") && da.len() == 7 + 64);
        let other = gen_synthetic::<f64>(4, 2, 4, Profile::Convex).unwrap();
        let c = InstanceFile::from_instance(&other, TableLayout::Records).unwrap();
        assert_ne!(da, instance_digest(&c).unwrap());
    }
}
