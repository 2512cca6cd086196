use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::SamplePath;
use crate::error::{Error, Result};

/// Full double precision: 17 significant digits in scientific notation.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `t,x1,...,xd` with one row per grid point.
pub fn write_csv<W: Write>(path: &SamplePath, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=path.dim()).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(path.dim() + 1);
    for k in 0..path.len() {
        row.clear();
        row.push(format_f64(path.time(k)));
        row.extend(path.point(k).iter().map(|&v| format_f64(v)));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<SamplePath> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 2 || &header[0] != "t" {
        return Err(Error::InvalidPath(
            "header must be `t,x1,...,xd`".into(),
        ));
    }
    for (i, name) in header.iter().skip(1).enumerate() {
        if name != format!("x{}", i + 1) {
            return Err(Error::InvalidPath(format!(
                "unexpected column `{name}`, expected `x{}`",
                i + 1
            )));
        }
    }
    let dim = header.len() - 1;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidPath(format!("row {}: cannot parse `{s}`", line + 1)))
        };
        times.push(parse(&rec[0])?);
        for v in rec.iter().skip(1) {
            values.push(parse(v)?);
        }
    }
    SamplePath::new(times, values, dim)
}

impl SamplePath {
    pub fn read_csv_file(file: impl AsRef<Path>) -> Result<SamplePath> {
        let file = file.as_ref();
        let f = File::open(file).map_err(|e| Error::io(file, e))?;
        read_csv(f)
    }

    pub fn write_csv_file(&self, file: impl AsRef<Path>) -> Result<()> {
        let file = file.as_ref();
        let f = File::create(file).map_err(|e| Error::io(file, e))?;
        write_csv(self, std::io::BufWriter::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_digits() {
        let p = SamplePath::new(vec![0.0, 1.0], vec![0.1, 0.2, 1.0 / 3.0, -2.0], 2).unwrap();
        let mut buf = Vec::new();
        write_csv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x1,x2"));
        assert_eq!(
            lines.next(),
            Some("0.0000000000000000e0,1.0000000000000001e-1,2.0000000000000001e-1")
        );
    }

    #[test]
    fn rejects_bad_header() {
        assert!(read_csv("time,x1\n0,0\n1,1\n".as_bytes()).is_err());
        assert!(read_csv("t,x2\n0,0\n1,1\n".as_bytes()).is_err());
        assert!(read_csv("t,x1\n0,zero\n1,1\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(
            vals in prop::collection::vec(-1e6f64..1e6, 2..40),
            dt in 1e-6f64..10.0,
        ) {
            let times: Vec<f64> = (0..vals.len()).map(|k| k as f64 * dt).collect();
            let p = SamplePath::scalar(times, vals).unwrap();
            let mut buf = Vec::new();
            write_csv(&p, &mut buf).unwrap();
            let q = read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(p, q);
        }
    }
}
