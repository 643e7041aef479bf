//! Figure presets shipped with the binary. Each is an ordinary config file;
//! its comment block lists the parameters the figure does not state.

use crate::config::RunConfig;
use crate::CliError;

/// Subcommand a preset runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Phase,
    Dtop,
    Fid,
    Fisher,
    Scaling,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Phase => "phase",
            Command::Dtop => "dtop",
            Command::Fid => "fid",
            Command::Fisher => "fisher",
            Command::Scaling => "scaling",
        }
    }
}

pub struct Preset {
    pub name: &'static str,
    pub command: Command,
    pub text: &'static str,
}

pub const PRESETS: [Preset; 6] = [
    Preset { name: "fig1", command: Command::Dtop, text: include_str!("../presets/fig1.toml") },
    Preset { name: "fig2", command: Command::Scaling, text: include_str!("../presets/fig2.toml") },
    Preset { name: "fig3a", command: Command::Fid, text: include_str!("../presets/fig3a.toml") },
    Preset { name: "fig3c", command: Command::Fisher, text: include_str!("../presets/fig3c.toml") },
    Preset { name: "fig4", command: Command::Scaling, text: include_str!("../presets/fig4.toml") },
    Preset { name: "fig4d", command: Command::Scaling, text: include_str!("../presets/fig4d.toml") },
];

pub fn find(name: &str) -> Result<&'static Preset, CliError> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        CliError::Config(format!("unknown preset {name:?}; known: {}", names.join(", ")))
    })
}

impl Preset {
    pub fn config(&self) -> Result<RunConfig, CliError> {
        RunConfig::parse(self.text)
    }

    /// Bullet lines of the "Assumptions" comment block.
    pub fn assumptions(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut inside = false;
        for line in self.text.lines() {
            let Some(body) = line.strip_prefix('#') else {
                break;
            };
            let body = body.trim();
            if body.starts_with("Assumptions") {
                inside = true;
            } else if inside {
                if let Some(item) = body.strip_prefix("- ") {
                    out.push(item.to_string());
                } else if !body.is_empty() {
                    if let Some(last) = out.last_mut() {
                        last.push(' ');
                        last.push_str(body);
                    }
                }
            }
        }
        out
    }
}
