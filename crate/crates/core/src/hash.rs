//! Content hash identifying a (device, scenario) pair.
//!
//! Artifacts embed this hash so that report tooling can refuse to combine
//! outputs that came from different setups. The hash covers the realized
//! grid, the material table and the scenario; solver tolerances and output
//! options are excluded.

use sha2::{Digest, Sha256};

use crate::model::grid::Device;
use crate::model::scenario::ScenarioSpec;

pub fn scenario_hash(device: &Device, scenario: &ScenarioSpec) -> String {
    let mut hasher = Sha256::new();
    // serde_json serialization is deterministic for these types: struct
    // fields keep declaration order and floats format via ryu.
    let device_json = serde_json::to_vec(device).expect("device serializes");
    let scenario_json = serde_json::to_vec(scenario).expect("scenario serializes");
    hasher.update((device_json.len() as u64).to_le_bytes());
    hasher.update(&device_json);
    hasher.update(&scenario_json);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::grid::VoxelGrid;
    use crate::model::material::{Material, MaterialTable};
    use crate::model::scenario::ScenarioSpec;

    fn device() -> Device {
        let materials = MaterialTable::new(vec![Material::constant("m", 1.0, 1.0)]).unwrap();
        Device::from_parts(VoxelGrid::uniform_block(2, 2, 2, [1e-6; 3], 0), materials)
    }

    #[test]
    fn identical_inputs_hash_identically() {
        let scenario = ScenarioSpec::with_side_walls(300.0);
        assert_eq!(
            scenario_hash(&device(), &scenario),
            scenario_hash(&device(), &scenario)
        );
    }

    #[test]
    fn different_scenarios_hash_differently() {
        let a = ScenarioSpec::with_side_walls(300.0);
        let b = ScenarioSpec::with_side_walls(301.0);
        assert_ne!(scenario_hash(&device(), &a), scenario_hash(&device(), &b));
    }
}
