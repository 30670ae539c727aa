use std::ffi::CStr;
use std::ptr;

use onebit_emr_ffi::*;

fn last_error() -> String {
    let p = emr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn quantiles_and_thresholds() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(emr_std_normal_quantile(0.975, &mut x), EmrStatus::Ok);
        assert!((x - 1.959963984540054).abs() < 1e-12);
        assert_eq!(emr_chi_square_quantile(0.999, 28, &mut x), EmrStatus::Ok);
        assert!((x - 56.892285393353625).abs() < 1e-7);
        assert_eq!(emr_threshold(4, 1000, 1e-3, EmrThresholdScheme::OneBitExact, &mut x), EmrStatus::Ok);
        assert!((x - (1.0 + 56.892285393353625 / 4000.0)).abs() < 1e-10);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(emr_std_normal_quantile(1.5, &mut x), EmrStatus::Domain);
        assert!(last_error().contains("1.5"));
        assert_eq!(emr_std_normal_quantile(0.5, ptr::null_mut()), EmrStatus::NullPointer);
        assert_eq!(emr_threshold(0, 10, 0.01, EmrThresholdScheme::FullRes, &mut x), EmrStatus::InvalidConfig);
        let (mut f, mut t) = (0u64, 0u64);
        assert_eq!(emr_cost(EmrCostScheme::EightBit, u64::MAX / 2, 10, &mut f, &mut t), EmrStatus::Overflow);
    }
}

#[test]
fn cost_counts() {
    let (mut f8, mut t8, mut f1, mut t1) = (0, 0, 0, 0);
    unsafe {
        assert_eq!(emr_cost(EmrCostScheme::EightBit, 16, 99, &mut f8, &mut t8), EmrStatus::Ok);
        assert_eq!(emr_cost(EmrCostScheme::OneBit, 16, 99, &mut f1, &mut t1), EmrStatus::Ok);
    }
    assert_eq!(f8, 256 * 100);
    assert_eq!(f1, 4 * f8);
    assert_eq!(4 * t8, 753 * t1);
}

#[test]
fn frame_handles_round_trip() {
    unsafe {
        let mut sc = ptr::null_mut();
        assert_eq!(emr_scenario_single_pu(4, 64, 0.0, -1.0471975511965976, &mut sc), EmrStatus::Ok);
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(emr_frame_generate(sc, 7, 3, &mut a), EmrStatus::Ok);
        assert_eq!(emr_frame_generate(sc, 7, 3, &mut b), EmrStatus::Ok);
        let (mut xa, mut xb, mut full) = (0.0, 0.0, 0.0);
        assert_eq!(emr_frame_statistic(a, EmrStatistic::OneBit, &mut xa), EmrStatus::Ok);
        assert_eq!(emr_frame_statistic(b, EmrStatistic::OneBit, &mut xb), EmrStatus::Ok);
        assert_eq!(xa, xb);
        assert!(xa >= 1.0);
        assert_eq!(emr_frame_statistic(a, EmrStatistic::FullRes, &mut full), EmrStatus::Ok);
        assert!(full >= 1.0);
        emr_frame_free(a);
        emr_frame_free(b);
        emr_scenario_free(sc);
        emr_scenario_free(ptr::null_mut());

        // All-zero frame: one-bit statistic is defined, full resolution is not.
        let zeros = [0.0; 6];
        let mut z = ptr::null_mut();
        assert_eq!(emr_frame_from_planes(2, 3, zeros.as_ptr(), zeros.as_ptr(), &mut z), EmrStatus::Ok);
        let mut x = 0.0;
        assert_eq!(emr_frame_statistic(z, EmrStatistic::FullRes, &mut x), EmrStatus::Degenerate);
        assert_eq!(emr_frame_statistic(z, EmrStatistic::OneBit, &mut x), EmrStatus::Ok);
        emr_frame_free(z);
        assert_eq!(emr_frame_statistic(ptr::null(), EmrStatistic::OneBit, &mut x), EmrStatus::NullPointer);
    }
}

#[test]
fn false_alarm_rate_is_reproducible() {
    unsafe {
        let mut sc = ptr::null_mut();
        assert_eq!(emr_scenario_noise_only(4, 256, &mut sc), EmrStatus::Ok);
        let mut eta = 0.0;
        assert_eq!(emr_threshold(4, 256, 0.05, EmrThresholdScheme::OneBitExact, &mut eta), EmrStatus::Ok);
        let (mut r1, mut r2) = (0.0, 0.0);
        assert_eq!(emr_estimate_rate(sc, EmrStatistic::OneBit, eta, 4000, 9, 1, &mut r1), EmrStatus::Ok);
        assert_eq!(emr_estimate_rate(sc, EmrStatistic::OneBit, eta, 4000, 9, 3, &mut r2), EmrStatus::Ok);
        assert_eq!(r1, r2);
        assert!((r1 - 0.05).abs() < 0.02, "{r1}");
        emr_scenario_free(sc);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(emr_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// The generated header parses as strict C99 and declares what a caller needs.
#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/onebit_emr.h");
    let text = std::fs::read_to_string(header).unwrap();
    for sym in ["emr_threshold", "emr_frame_free", "EMR_STATUS_OK", "typedef struct EmrFrame EmrFrame"] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping compile check");
        return;
    };
    let dir = tempfile_dir();
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        "#include \"onebit_emr.h\"\n\
         int main(void) {\n\
           double eta = 0.0;\n\
           EmrScenario *sc = NULL;\n\
           if (emr_threshold(4, 1000, 1e-3, EMR_THRESHOLD_SCHEME_ONE_BIT_EXACT, &eta) != EMR_STATUS_OK) return 1;\n\
           if (emr_scenario_noise_only(4, 1000, &sc) != EMR_STATUS_OK) return 2;\n\
           emr_scenario_free(sc);\n\
           return 0;\n\
         }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
    let _ = std::fs::remove_dir_all(dir);
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("onebit-emr-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
