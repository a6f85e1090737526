use hyperrank::fixtures::{toy_hypergraph, toy_v, TOY_ALPHA};
use hyperrank::motifs::{d3c_hypergraph, filter_network, read_edge_list, write_id_map};
use hyperrank::partition::{recursive_partition, write_partition_csv, PartitionOptions};
use hyperrank::perturb::{perturbation_experiment, run_trials, write_experiment_csv, PerturbationSpec, Target};
use hyperrank::PageRankProblem;

fn toy() -> PageRankProblem {
    PageRankProblem::from_hypergraph(&toy_hypergraph(), TOY_ALPHA, toy_v()).unwrap()
}

#[test]
fn trials_do_not_depend_on_thread_count() {
    let spec = PerturbationSpec::new(0.01, Target::Both, 12, 99).unwrap();
    let one = run_trials(&toy(), &spec, 1).unwrap();
    let four = run_trials(&toy(), &spec, 4).unwrap();
    let a: Vec<f64> = one.trials.iter().map(|t| t.dy).collect();
    let b: Vec<f64> = four.trials.iter().map(|t| t.dy).collect();
    assert_eq!(a, b);
    assert_eq!(one.violations, 0);
    for t in &one.trials {
        assert!((t.v_norm - 0.01).abs() < 1e-9);
        assert!((t.tensor_norm - 0.04).abs() < 1e-9);
    }
}

#[test]
fn experiment_csv_has_one_row_per_sigma_and_mode() {
    let rows = perturbation_experiment(&toy(), &[1e-3, 1e-2], &[Target::V, Target::Tensor], 5, 1, 2).unwrap();
    let mut buf = Vec::new();
    write_experiment_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sigma,mode,mean_dy,bound");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].contains(",v,") && lines[2].contains(",tensor,"));
}

#[test]
fn network_to_partition_keeps_external_ids() {
    // two directed triangles joined by one arc, ids far from 0..n
    let text = "# net\n100 200\n200 300\n300 100\n400 500\n500 600\n600 400\n300 400\n";
    let (g, stats) = read_edge_list(text.as_bytes()).unwrap();
    assert_eq!(stats.arcs_read, 7);
    let (f, d) = filter_network(&g).unwrap();
    // the joining arc lies on no cycle, so only one triangle survives
    assert_eq!(d.len(), 1);
    assert_eq!(f.ids(), &[100, 200, 300]);
    let h = d3c_hypergraph(&f, &d).unwrap();
    let parts = recursive_partition(&h, 2, &PartitionOptions::default()).unwrap().parts;
    let mut csv = Vec::new();
    write_partition_csv(&mut csv, &parts, Some(f.ids())).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert!(csv.starts_with("vertex,part\n"));
    assert_eq!(csv.lines().count(), 4);
    let mut map = Vec::new();
    write_id_map(&mut map, &f).unwrap();
    assert_eq!(String::from_utf8(map).unwrap(), "vertex,id\n1,100\n2,200\n3,300\n");
}
