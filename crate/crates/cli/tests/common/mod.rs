#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use texscan::synth::{insert_patch, stripe_texture, StripeSpec};
use texscan::{save_pgm, GrayImage, Rect};

pub const ROWS: usize = 461;
pub const COLS: usize = 512;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_texscan"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn texscan")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn clean_frame(seed: u64) -> GrayImage {
    stripe_texture(&StripeSpec::default(), COLS, ROWS, seed)
}

/// 60×60 flat patch fully enclosing the 50×50 grid window at (200, 150).
pub const PATCH: Rect = Rect::new(200, 150, 60, 60);

pub fn defect_frame(seed: u64) -> GrayImage {
    insert_patch(&clean_frame(seed), PATCH, 128)
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> PathBuf {
    std::fs::write(path, save_pgm(img)).unwrap();
    path.to_path_buf()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
