use std::fs;
use std::path::{Path, PathBuf};

use sandcross::geometry::{discretize, rat, Shape};
use sandcross::grid::Neighborhood;
use sandcross::synthesis::synthesize;
use sandcross_cli::{io, run, EXIT_CROSSING, EXIT_ERROR, EXIT_NOT_CROSSING};
use tempfile::TempDir;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn sandcross(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sandcross").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path: PathBuf = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn discretize_unit_disk_at_one() {
    let dir = TempDir::new().unwrap();
    let disk = write(dir.path(), "disk.json", &io::shape_to_json(&Shape::unit_disk()));
    let o = sandcross(&["discretize", &disk, "--ratio", "1"]);
    assert_eq!(o.code, EXIT_CROSSING, "{}", o.stderr);
    assert_eq!(io::neighborhood_from_json(&o.stdout).unwrap(), Neighborhood::von_neumann(1));
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let s = synthesize(&Shape::unit_disk(), &rat(20)).unwrap();
    let doc = write(dir.path(), "cross.json", &io::synthesis_to_json(&s));
    let nb = write(dir.path(), "nb.json", &io::neighborhood_to_json(&s.neighborhood));
    let o = sandcross(&["verify", &doc, "--nb", &nb]);
    assert_eq!(o.code, EXIT_CROSSING, "{}", o.stdout);
    assert!(o.stdout.contains("\"verdict\": true"));

    let empty = write(dir.path(), "empty.json", r#"{"cells":[]}"#);
    let spec = write(dir.path(), "spec.json", &io::spec_to_json(&s.spec));
    let o = sandcross(&["verify", &empty, "--nb", &nb, "--spec", &spec]);
    assert_eq!(o.code, EXIT_NOT_CROSSING);
    assert!(o.stdout.contains("\"verdict\": false"));
}

#[test]
fn errors_are_one_line() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    for args in [
        vec!["frobnicate"],
        vec!["discretize"],
        vec!["discretize", "/nonexistent/shape.json", "--ratio", "1"],
        vec!["discretize", bad.as_str(), "--ratio", "1"],
        vec!["synthesize", bad.as_str(), "--ratio", "1", "--sweep", "3", "1"],
    ] {
        let o = sandcross(&args);
        assert_eq!(o.code, EXIT_ERROR, "{args:?}");
        assert_eq!(o.stderr.lines().count(), 1, "{args:?}: {}", o.stderr);
        assert!(o.stdout.is_empty());
    }
    let disk = write(dir.path(), "disk.json", &io::shape_to_json(&Shape::unit_disk()));
    let o = sandcross(&["discretize", &disk, "--ratio", "one"]);
    assert_eq!(o.code, EXIT_ERROR);
    assert_eq!(o.stderr.trim(), "error: invalid ratio \"one\"");
}

#[test]
fn stabilize_writes_a_stable_configuration() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"cells":[[0,0,9],[1,0,3]]}"#);
    let nb = write(dir.path(), "nb.json", &io::neighborhood_to_json(&Neighborhood::von_neumann(1)));
    let out = dir.path().join("out.json");
    let o = sandcross(&["stabilize", &cfg, "--nb", &nb, "-o", out.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_CROSSING, "{}", o.stderr);
    assert!(o.stdout.is_empty());
    let stable = io::configuration_from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(stable.is_stable(&Neighborhood::von_neumann(1)));
    assert_eq!(stable.total(), 12);
    let seq = sandcross(&["stabilize", &cfg, "--nb", &nb, "--sequential", "7"]);
    assert_eq!(io::configuration_from_json(&seq.stdout).unwrap(), stable);
}

#[test]
fn synthesize_reports_small_ratios() {
    let dir = TempDir::new().unwrap();
    let disk = write(dir.path(), "disk.json", &io::shape_to_json(&Shape::unit_disk()));
    let o = sandcross(&["synthesize", &disk, "--ratio", "2"]);
    assert_eq!(o.code, EXIT_NOT_CROSSING, "{}", o.stderr);
    assert!(o.stdout.contains("\"error\""));
}

#[test]
fn render_arrow_count_matches_arcs() {
    let dir = TempDir::new().unwrap();
    let s = synthesize(&Shape::unit_disk(), &rat(20)).unwrap();
    let doc = write(dir.path(), "cross.json", &io::synthesis_to_json(&s));
    let nb = write(dir.path(), "nb.json", &io::neighborhood_to_json(&s.neighborhood));
    let g = sandcross(&["graphs", &doc, "--nb", &nb]);
    assert_eq!(g.code, EXIT_CROSSING, "{}", g.stderr);
    let (we, ns) = io::graph_pair_from_json(&g.stdout).unwrap();
    let graphs = write(dir.path(), "g.json", &g.stdout);
    let svg = sandcross(&["render", &doc, "--graphs", &graphs, "--nb", &nb]);
    assert_eq!(svg.code, EXIT_CROSSING);
    assert_eq!(svg.stdout.matches("<line ").count(), we.arcs.len() + ns.arcs.len());
    assert_eq!(svg.stdout.matches("class=\"border\"").count(), 4);

    let only_we = sandcross(&["render", &doc, "--graphs", &graphs, "--layers", "firing-graph-we"]);
    assert_eq!(only_we.stdout.matches("<line ").count(), we.arcs.len());
    assert_eq!(sandcross(&["render", &doc, "--layers", "glitter"]).code, EXIT_ERROR);
}

#[test]
fn render_empty_configuration_is_just_a_frame() {
    let dir = TempDir::new().unwrap();
    let empty = write(dir.path(), "empty.json", r#"{"cells":[]}"#);
    let o = sandcross(&["render", &empty]);
    assert_eq!(o.code, EXIT_CROSSING);
    assert_eq!(o.stdout.matches("<rect").count(), 1);
    assert!(!o.stdout.contains("<line"));
}

#[test]
fn disjointify_passes_disjoint_crossings_through() {
    let dir = TempDir::new().unwrap();
    let s = synthesize(&Shape::unit_disk(), &rat(20)).unwrap();
    let doc = write(dir.path(), "cross.json", &io::synthesis_to_json(&s));
    let nb = write(dir.path(), "nb.json", &io::neighborhood_to_json(&discretize(&Shape::unit_disk(), &rat(20)).unwrap()));
    let o = sandcross(&["disjointify", &doc, "--nb", &nb]);
    assert_eq!(o.code, EXIT_CROSSING, "{}", o.stderr);
    assert_eq!(io::configuration_from_json(&o.stdout).unwrap(), s.configuration);

    let empty = write(dir.path(), "empty.json", r#"{"cells":[]}"#);
    let spec = write(dir.path(), "spec.json", &io::spec_to_json(&s.spec));
    assert_eq!(sandcross(&["disjointify", &empty, "--nb", &nb, "--spec", &spec]).code, EXIT_NOT_CROSSING);
}
