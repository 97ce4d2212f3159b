use std::collections::BTreeMap;

use unitac::dataset::{load_dataset, save_dataset, stratified_split, unseen_object_ids};
use unitac::model::UniTacModel;
use unitac::sensor::{NormStats, SensorKind};
use unitac::sim::{builtin_objects, generate_paired_dataset, PressGrid};

#[test]
fn full_protocol_counts() {
    let objects = builtin_objects();
    let data = generate_paired_dataset(&objects, &PressGrid::full(), 0).unwrap();
    let per_press = 91 * 25;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &data {
        *counts.entry(s.meta().object_id.as_str()).or_default() += 1;
    }
    for o in &objects {
        let expected = if o.seen { per_press } else { 4 * per_press };
        assert_eq!(counts[o.id.as_str()], expected, "{}", o.id);
    }
    assert_eq!(data.len(), 6 * per_press + 4 * per_press);

    let unseen = unseen_object_ids(&objects);
    let split = stratified_split(&data, 0.1, 0, &unseen).unwrap();
    for o in objects.iter().filter(|o| o.seen) {
        assert_eq!(split.held_out_angles[&o.id].len(), 9, "{}", o.id);
    }
    assert_eq!(split.test.len(), 6 * 9 * 25 + 4 * per_press);
    assert_eq!(split.train.len(), 6 * 82 * 25);
}

#[test]
fn normalisation_comes_from_the_training_split_only() {
    let objects = builtin_objects();
    let data = generate_paired_dataset(&objects, &PressGrid::fast(), 3).unwrap();
    let split = stratified_split(&data, 0.1, 3, &unseen_object_ids(&objects)).unwrap();
    let model = UniTacModel::init(&split.train, 0.0, 3).unwrap();

    for kind in SensorKind::ALL {
        let train_only =
            NormStats::from_frames(kind, split.train.iter().map(|s| s.frame(kind))).unwrap();
        let everything = NormStats::from_frames(kind, data.iter().map(|s| s.frame(kind))).unwrap();
        assert_eq!(model.norm(kind), &train_only);
        // the test split (unseen object included) extends the range, so fitting on it would leak
        assert_ne!(train_only, everything, "{kind}");
    }
}

#[test]
fn dataset_file_survives_a_round_trip_through_disk() {
    let objects: Vec<_> = builtin_objects().into_iter().filter(|o| !o.seen).collect();
    let data = generate_paired_dataset(&objects, &PressGrid::fast(), 8).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing/dir/unseen.utd");
    let header = save_dataset(&data, 8, &path).unwrap();
    assert_eq!(header.sample_count, 4 * 31 * 9);
    let back = load_dataset(&path).unwrap();
    assert_eq!(back.header, header);
    assert_eq!(back.samples, data);
}
