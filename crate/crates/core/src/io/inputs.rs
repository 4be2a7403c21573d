//! Experiment inputs: annotation boxes, participant votes, ground-truth boxes.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use super::{create_writer, csv_error, finish, CsvRows};
use crate::error::{Error, Result};
use crate::heatmap::{AnnotationSet, BoundingBox};
use crate::ranking::VoteTally;

const ANNOTATION_HEADER: [&str; 6] = ["image_id", "annotator_id", "x_min", "y_min", "x_max", "y_max"];
const VOTE_HEADER: [&str; 3] = ["image_id", "participant_id", "method"];
const TRUTH_HEADER: [&str; 5] = ["image_id", "x_min", "y_min", "x_max", "y_max"];

fn parse_box(rows: &CsvRows, line: u64, record: &csv::StringRecord, first: usize, canvas: (u32, u32)) -> Result<BoundingBox> {
    let coord = |i: usize| rows.parse::<u32>(line, record, first + i, TRUTH_HEADER[1 + i]);
    let bbox = BoundingBox::new(coord(0)?, coord(1)?, coord(2)?, coord(3)?)
        .and_then(|b| b.check_fits(canvas.0, canvas.1).map(|_| b))
        .map_err(|e| rows.error(line, e.to_string()))?;
    Ok(bbox)
}

/// Annotation boxes grouped by image, on a `width x height` canvas.
pub fn read_annotations(path: &Path, width: u32, height: u32) -> Result<BTreeMap<String, AnnotationSet>> {
    let rows = CsvRows::read(path, &ANNOTATION_HEADER)?;
    let mut sets: BTreeMap<String, AnnotationSet> = BTreeMap::new();
    for (line, record) in &rows.rows {
        let bbox = parse_box(&rows, *line, record, 2, (width, height))?;
        sets.entry(record[0].to_string())
            .or_insert_with(|| AnnotationSet::new(&record[0], width, height))
            .push(&record[1], bbox)?;
    }
    Ok(sets)
}

pub fn write_annotations(sets: &BTreeMap<String, AnnotationSet>, path: &Path) -> Result<()> {
    let mut w = create_writer(path)?;
    w.write_record(ANNOTATION_HEADER).map_err(|e| csv_error(path, e))?;
    for set in sets.values() {
        for b in &set.boxes {
            let bb = b.bbox;
            w.write_record([
                set.image_id.as_str(),
                &b.annotator_id,
                &bb.x_min.to_string(),
                &bb.y_min.to_string(),
                &bb.x_max.to_string(),
                &bb.y_max.to_string(),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
    }
    finish(path, w)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteRecord {
    pub image_id: String,
    pub participant_id: String,
    pub method: String,
}

/// Vote tallies by image. Every method must be in `registry` and a
/// participant may vote once per image.
pub fn read_votes(path: &Path, registry: &[String]) -> Result<BTreeMap<String, VoteTally>> {
    let rows = CsvRows::read(path, &VOTE_HEADER)?;
    let mut tallies: BTreeMap<String, VoteTally> = BTreeMap::new();
    let mut seen = HashSet::new();
    for (line, record) in &rows.rows {
        let (image, participant, method) = (&record[0], &record[1], &record[2]);
        if !registry.iter().any(|m| m == method) {
            return Err(Error::UnknownMethod {
                method: method.to_string(),
                line: Some(*line),
            });
        }
        if !seen.insert((image.to_string(), participant.to_string())) {
            return Err(rows.error(*line, format!("participant {participant:?} voted twice for image {image:?}")));
        }
        tallies
            .entry(image.to_string())
            .or_insert_with(|| VoteTally::new(image))
            .add_vote(method);
    }
    Ok(tallies)
}

pub fn write_votes(records: &[VoteRecord], path: &Path) -> Result<()> {
    let mut w = create_writer(path)?;
    w.write_record(VOTE_HEADER).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.write_record([&r.image_id, &r.participant_id, &r.method])
            .map_err(|e| csv_error(path, e))?;
    }
    finish(path, w)
}

/// One ground-truth box per image.
pub fn read_truth(path: &Path, width: u32, height: u32) -> Result<BTreeMap<String, BoundingBox>> {
    let rows = CsvRows::read(path, &TRUTH_HEADER)?;
    let mut out = BTreeMap::new();
    for (line, record) in &rows.rows {
        let bbox = parse_box(&rows, *line, record, 1, (width, height))?;
        if out.insert(record[0].to_string(), bbox).is_some() {
            return Err(rows.error(*line, format!("second ground-truth box for image {:?}", &record[0])));
        }
    }
    Ok(out)
}

pub fn write_truth(boxes: &BTreeMap<String, BoundingBox>, path: &Path) -> Result<()> {
    let mut w = create_writer(path)?;
    w.write_record(TRUTH_HEADER).map_err(|e| csv_error(path, e))?;
    for (image, b) in boxes {
        w.write_record([
            image.as_str(),
            &b.x_min.to_string(),
            &b.y_min.to_string(),
            &b.x_max.to_string(),
            &b.y_max.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    finish(path, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::default_methods;
    use std::fs;

    #[test]
    fn annotations_group_by_image() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        fs::write(
            &path,
            "image_id,annotator_id,x_min,y_min,x_max,y_max\nimg1,p1,0,0,4,4\nimg1,p2,1,1,3,3\nimg2,p1,2,2,5,6\n",
        )
        .unwrap();
        let sets = read_annotations(&path, 8, 8).unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets["img1"].boxes.len(), 2);
        let copy = dir.path().join("b.csv");
        write_annotations(&sets, &copy).unwrap();
        assert_eq!(read_annotations(&copy, 8, 8).unwrap(), sets);
    }

    #[test]
    fn annotation_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        fs::write(&path, "image_id,annotator_id,x_min,y_min,x_max,y_max\nimg1,p1,0,0,4,4\nimg1,p2,0,0,9,4\n").unwrap();
        assert!(matches!(read_annotations(&path, 8, 8), Err(Error::MalformedCsv { line: 3, .. })));
        fs::write(&path, "image_id,annotator_id,x_min,y_min,x_max,y_max\nimg1,p1,a,0,4,4\n").unwrap();
        assert!(matches!(read_annotations(&path, 8, 8), Err(Error::MalformedCsv { line: 2, .. })));
        fs::write(&path, "image,annotator,x0,y0,x1,y1\n").unwrap();
        assert!(matches!(read_annotations(&path, 8, 8), Err(Error::MalformedCsv { line: 1, .. })));
    }

    #[test]
    fn votes_validate_methods() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        fs::write(&path, "image_id,participant_id,method\nimg,p1,CAM\nimg,p2,FOO\n").unwrap();
        match read_votes(&path, &default_methods()) {
            Err(Error::UnknownMethod { method, line }) => {
                assert_eq!(method, "FOO");
                assert_eq!(line, Some(3));
            }
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&path, "image_id,participant_id,method\nimg,p1,CAM\nimg,p1,LCAM\n").unwrap();
        assert!(matches!(read_votes(&path, &default_methods()), Err(Error::MalformedCsv { line: 3, .. })));
    }

    #[test]
    fn empty_vote_file_has_no_tallies() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        fs::write(&path, "").unwrap();
        assert!(read_votes(&path, &default_methods()).unwrap().is_empty());
        fs::write(&path, "image_id,participant_id,method\n").unwrap();
        assert!(read_votes(&path, &default_methods()).unwrap().is_empty());
    }

    #[test]
    fn truth_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut boxes = BTreeMap::new();
        boxes.insert("a".to_string(), BoundingBox::new(1, 2, 3, 4).unwrap());
        boxes.insert("b,with comma".to_string(), BoundingBox::new(0, 0, 5, 5).unwrap());
        write_truth(&boxes, &path).unwrap();
        assert_eq!(read_truth(&path, 5, 5).unwrap(), boxes);
        assert!(read_truth(&path, 4, 4).is_err());
    }
}
