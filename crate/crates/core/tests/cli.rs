use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use kinoplan::cli::{run, EXIT_EXPANSION_LIMIT, EXIT_NO_PATH, EXIT_OK, EXIT_USAGE};
use kinoplan::gridmap::{Cell, OccupancyGrid};
use kinoplan::trajio::read_segments;

fn corridor() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/corridor.map")
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("kinoplan").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn plan_args<'a>(map: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "plan",
        "--map",
        map,
        "--start",
        "1.25,2.75,0.25",
        "--goal",
        "18.75,2.75,0.25",
        "--vmax",
        "2",
        "--no-timing",
    ];
    v.extend_from_slice(extra);
    v
}

#[test]
fn corridor_plan_is_solved_and_reproducible() {
    let map = corridor();
    let map = map.to_str().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    let segs = dir.path().join("a.segs");
    let args = plan_args(
        map,
        &[
            "--out-csv",
            csv.to_str().unwrap(),
            "--out-segs",
            segs.to_str().unwrap(),
        ],
    );
    let (code, out, _) = invoke(&args);
    assert_eq!(code, EXIT_OK);
    let fields: Vec<&str> = out.trim_end().split(' ').collect();
    assert_eq!(fields.len(), 4, "{out}");
    assert_eq!((fields[0], fields[3]), ("solved", "0.000000"));
    let cost: f64 = fields[1].parse().unwrap();
    // Dijkstra finds the same cost.
    let (_, dijkstra, _) = invoke(&plan_args(map, &["--heuristic", "zero"]));
    assert_eq!(dijkstra.split(' ').nth(1), Some(fields[1]));
    let first = (fs::read(&csv).unwrap(), fs::read(&segs).unwrap());
    let (code2, out2, _) = invoke(&args);
    assert_eq!((code2, out2), (code, out));
    assert_eq!((fs::read(&csv).unwrap(), fs::read(&segs).unwrap()), first);

    let text = String::from_utf8(first.0).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,px,py,pz,vx,vy,vz,ax,ay,az");
    let traj = read_segments(&segs).unwrap();
    assert_eq!(traj.order, 2);
    // Unit durations: the objective is duration plus effort.
    let steps = traj.segments.len() as f64;
    assert!((traj.duration() - steps).abs() < 1e-12);
    assert!(cost >= steps && cost <= 3.0 * steps);
}

#[test]
fn refined_plan_writes_a_spline() {
    let map = corridor();
    let dir = tempfile::tempdir().unwrap();
    let segs = dir.path().join("r.segs");
    let args = plan_args(
        map.to_str().unwrap(),
        &[
            "--refine",
            "--refine-order",
            "4",
            "--out-segs",
            segs.to_str().unwrap(),
        ],
    );
    let (code, out, _) = invoke(&args);
    assert_eq!(code, EXIT_OK, "{out}");
    let traj = read_segments(&segs).unwrap();
    assert_eq!(traj.order, 4);
    assert!(traj
        .segments
        .iter()
        .all(|s| s.axes.iter().all(|p| p.degree() <= 7)));
}

#[test]
fn unreachable_goal_exits_with_no_path() {
    let map = corridor();
    let (code, out, _) = invoke(&[
        "plan",
        "--map",
        map.to_str().unwrap(),
        "--start",
        "1.25,2.75,0.25",
        "--goal",
        "100,100,0.25",
        "--vmax",
        "2",
        "--no-timing",
    ]);
    assert_eq!(code, EXIT_NO_PATH);
    assert_eq!(out, "no_path inf 0 0.000000\n");
}

#[test]
fn expansion_limit_has_its_own_exit_code() {
    let map = corridor();
    let args = plan_args(
        map.to_str().unwrap(),
        &["--max-expansions", "5", "--heuristic", "zero"],
    );
    let (code, out, _) = invoke(&args);
    assert_eq!(code, EXIT_EXPANSION_LIMIT);
    assert!(out.starts_with("expansion_limit inf 5 "), "{out}");
}

#[test]
fn usage_errors_exit_with_one() {
    let map = corridor();
    let map = map.to_str().unwrap();
    // Max-speed heuristic needs a velocity bound.
    let (code, _, err) = invoke(&[
        "plan",
        "--map",
        map,
        "--start",
        "1.25,2.75,0.25",
        "--goal",
        "3.25,2.75,0.25",
        "--heuristic",
        "maxspeed",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.starts_with("error: "), "{err}");
    for bad in [
        vec![
            "plan", "--map", map, "--start", "1,2", "--goal", "3,3,0", "--vmax", "2",
        ],
        vec![
            "plan",
            "--map",
            "/nonexistent.map",
            "--start",
            "1,2,0",
            "--goal",
            "3,3,0",
            "--vmax",
            "2",
        ],
        vec![
            "plan", "--map", map, "--start", "1,2,0", "--goal", "3,3,0", "--order", "4",
        ],
        vec![
            "plan",
            "--map",
            map,
            "--start",
            "1,2,0",
            "--goal",
            "3,3,0",
            "--refine-order",
            "3",
        ],
        vec!["frobnicate"],
    ] {
        assert_eq!(invoke(&bad).0, EXIT_USAGE, "{bad:?}");
    }
    // Start inside a wall.
    let (code, _, _) = invoke(&[
        "plan",
        "--map",
        map,
        "--start",
        "0.25,0.25,0.25",
        "--goal",
        "3.25,2.75,0.25",
        "--vmax",
        "2",
    ]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_kinoplan");
    let map = corridor();
    let out = Command::new(bin)
        .args(plan_args(map.to_str().unwrap(), &[]))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let (_, expect, _) = invoke(&plan_args(map.to_str().unwrap(), &[]));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expect);
    let out = Command::new(bin).arg("plan").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn genmap_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let gen = |name: &str, density: &str, seed: &str| -> PathBuf {
        let path = dir.path().join(name);
        let (code, out, _) = invoke(&[
            "genmap",
            "--dims",
            "12",
            "9",
            "2",
            "--resolution",
            "0.25",
            "--density",
            density,
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, format!("wrote {}\n", path.display()));
        path
    };
    let a = fs::read(gen("a.map", "0.3", "7")).unwrap();
    let b = fs::read(gen("b.map", "0.3", "7")).unwrap();
    let c = fs::read(gen("c.map", "0.3", "8")).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);

    let empty = OccupancyGrid::load(gen("e.map", "0", "1")).unwrap();
    assert_eq!(empty.dims(), [12, 9, 2]);
    assert!(empty.cells().iter().all(|&c| c == Cell::Free));
    let full = OccupancyGrid::load(gen("f.map", "1", "1")).unwrap();
    assert!(full.cells().iter().all(|&c| c == Cell::Occupied));

    let (code, _, _) = invoke(&[
        "genmap",
        "--dims",
        "4",
        "4",
        "1",
        "--resolution",
        "1",
        "--density",
        "1.5",
        "--seed",
        "1",
        "--out",
        "x",
    ]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn bench_on_corpus_writes_all_rows() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.csv");
    let args = [
        "bench",
        "--corpus",
        "50",
        "--seed",
        "1",
        "--vmax",
        "2",
        "--no-timing",
        "--report",
        report.to_str().unwrap(),
    ];
    let (code, out, _) = invoke(&args);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("cases 50 solved "));
    assert_eq!(
        lines[1],
        "heuristic expanded_avg expanded_std expanded_max seconds_avg seconds_std seconds_max"
    );
    for (line, name) in lines[2..5].iter().zip(["zero", "maxspeed", "lqmt"]) {
        assert!(line.starts_with(name), "{line}");
        assert!(line.ends_with(" 0.000000 0.000000 0.000000"), "{line}");
    }
    assert!(lines[5].starts_with("ordering lqmt<=maxspeed<=zero "));

    let csv = fs::read_to_string(&report).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "case,map,heuristic,status,cost,expanded,seconds");
    assert_eq!(rows.len(), 1 + 150);
    let first = fs::read(&report).unwrap();
    let (code2, out2, _) = invoke(&args);
    assert_eq!((code2, &out2), (code, &out));
    assert_eq!(fs::read(&report).unwrap(), first);
}

#[test]
fn bench_on_map_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(corridor(), dir.path().join("corridor.map")).unwrap();
    let cases = dir.path().join("cases.txt");
    fs::write(
        &cases,
        "# start;goal\n1.25,2.75,0.25;5.25,2.75,0.25\ncorridor.map;1.25,2.75,0.25;1.25,4.75,0.25\n",
    )
    .unwrap();
    let (code, out, _) = invoke(&[
        "bench",
        "--maps",
        dir.path().to_str().unwrap(),
        "--cases",
        cases.to_str().unwrap(),
        "--vmax",
        "2",
        "--no-timing",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("cases 2 solved 2\n"), "{out}");

    fs::write(&cases, "\n# nothing\n").unwrap();
    let (code, _, err) = invoke(&[
        "bench",
        "--maps",
        dir.path().to_str().unwrap(),
        "--cases",
        cases.to_str().unwrap(),
        "--vmax",
        "2",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("no cases"));

    let (code, _, _) = invoke(&["bench", "--corpus", "2"]);
    assert_eq!(code, EXIT_USAGE);
}
