use super::measure::load_roi;
use super::{CliError, Context, OverlayArgs};
use crate::io::mask::{render_overlay, save_rgb};

pub fn run(args: OverlayArgs) -> Result<(), CliError> {
    if args.out.exists() && !args.force {
        return Err(CliError::input(format!(
            "{} already exists; pass --force to overwrite",
            args.out.display()
        )));
    }
    // Pixel size does not matter for drawing.
    let mask = load_roi(&args.mask, Some(1.0), args.mask_mode)?;
    let img = render_overlay(&args.image, &mask).at("drawing overlay on", &args.image)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::from(crate::error::Error::io(dir, e)))?;
    }
    save_rgb(&args.out, &img).at("writing", &args.out)
}
