use std::fs;
use std::path::Path;

use crate::world::{SceneSpec, WorldError};

/// Parses and validates a scene from JSON text.
pub fn parse_scene(text: &str) -> Result<SceneSpec, WorldError> {
    let scene: SceneSpec =
        serde_json::from_str(text).map_err(|e| WorldError::Parse(e.to_string()))?;
    scene.validate()?;
    Ok(scene)
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<SceneSpec, WorldError> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| WorldError::Io(format!("{}: {e}", path.display())))?;
    parse_scene(&text)
}

pub fn scene_to_json(scene: &SceneSpec) -> String {
    serde_json::to_string_pretty(scene).expect("scene serialisation is infallible")
}

pub fn save_scene(scene: &SceneSpec, path: impl AsRef<Path>) -> Result<(), WorldError> {
    let path = path.as_ref();
    fs::write(path, scene_to_json(scene) + "\n")
        .map_err(|e| WorldError::Io(format!("{}: {e}", path.display())))
}
