//! Writes a channel and a bath as JSON spec files, reads them back and
//! renders a report in the CLI formats.

use athermal::channels::amplitude_damping;
use athermal::cli::{run, BathSpecFile, ChannelSpecFile};
use athermal::qcore::{Hermitian, ThermalContext};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("athermal-spec-files");
    std::fs::create_dir_all(&dir)?;
    let channel = dir.join("damping.json");
    let bath = dir.join("bath.json");
    let n = amplitude_damping(0.25)?;
    let ctx = ThermalContext::new(Hermitian::from_real_diagonal(&[0.0, 1.0]), 2.0)?;
    std::fs::write(
        &channel,
        ChannelSpecFile::from_channel(&n, Some("damping".into())).to_json(),
    )?;
    std::fs::write(&bath, BathSpecFile::from_context(&ctx).to_json())?;

    let args = ["athermal", "--format", "table", "report"];
    let out = run(args
        .iter()
        .map(|s| s.to_string())
        .chain([channel.display().to_string(), bath.display().to_string()]));
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}
