//! Link budget of the macro and micro layers: path loss, sector pattern,
//! minimum coupling loss and the resulting linear gains.
//!
//! `cargo run --example path_loss`

use multilayer_power::geometry::{Point, WrapAround};
use multilayer_power::propagation::{
    link_gain, macro_path_loss_db, macro_path_loss_general_db, micro_path_loss_db,
    micro_path_loss_general_db, sector_antenna_gain_db, Layer, PropagationParams, Transmitter,
};

fn main() -> multilayer_power::Result<()> {
    let params = PropagationParams::default();
    params.validate()?;

    println!("distance   macro PL   (general)   micro PL   (general)");
    for d in [0.05, 0.1, 0.2, 0.5, 1.0, 2.0] {
        println!(
            "{d:5.2} km  {:8.2}   {:8.2}    {:8.2}   {:8.2}",
            macro_path_loss_db(d)?,
            macro_path_loss_general_db(d, params.macro_delta_h_bs_m, params.carrier_mhz)?,
            micro_path_loss_db(d)?,
            micro_path_loss_general_db(d, params.carrier_mhz)?,
        );
    }

    println!("\nsector pattern");
    for theta in [0.0, 30.0, 65.0, 90.0, 120.0, 180.0] {
        println!("{theta:5.0} deg  {:7.2} dB", sector_antenna_gain_db(theta));
    }

    let sector = Transmitter {
        layer: Layer::Macro,
        position: Point::new(0.0, 0.0),
        boresight_deg: Some(30.0),
    };
    let micro = Transmitter {
        layer: Layer::Micro,
        position: Point::new(0.4, 0.25),
        boresight_deg: None,
    };
    let wrap = WrapAround::identity();
    println!("\nuser at (0.45, 0.26) km, no shadowing");
    for (name, tx) in [("macro", &sector), ("micro", &micro)] {
        let g = link_gain(tx, Point::new(0.45, 0.26), 0.0, &params, &wrap);
        println!(
            "{name}: PL {:.2} dB, antennas {:+.2} dB, loss {:.2} dB{}, gain {:.3e}",
            g.path_loss_db,
            g.antenna_db,
            g.loss_db,
            if g.mcl_applied { " (MCL)" } else { "" },
            g.gain_linear
        );
    }
    Ok(())
}
