//! Diamond distance between the identity and the uniformly mixing channel,
//! and the Weyl-twirl form of the latter.

use athermal::channels::Channel;
use athermal::qcore::DensityMatrix;
use athermal::sdp::diamond_norm_of_channels;

fn main() -> athermal::Result<()> {
    for m in 2..=4 {
        let id = Channel::identity(m);
        let pi = Channel::replacer(&DensityMatrix::maximally_mixed(m), m);
        let mixing = Channel::uniform_mixing(m)?;
        let d = diamond_norm_of_channels(&id, &pi)?;
        println!(
            "m = {m}: ||id - R^pi|| = {d:.8} (halved {:.8}), Weyl mixture vs replacer {:.1e}",
            d / 2.0,
            mixing.choi_distance(&pi)
        );
    }
    Ok(())
}
