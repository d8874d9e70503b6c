use std::io::Write;

use faer::Mat;

use super::CorrelationRecord;

/// `alpha,P`
pub fn write_pair_corr_csv<W: Write>(out: W, record: &CorrelationRecord) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "P"])?;
    for (a, p) in record.p_pair.iter().enumerate() {
        w.serialize((a + 1, p))?;
    }
    w.flush()?;
    Ok(())
}

/// `E_minus_E0b,weight`
pub fn write_overlap_csv<W: Write>(out: W, overlaps: &[(f64, f64)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["E_minus_E0b", "weight"])?;
    for row in overlaps {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// `t,P_alpha<a>,…` with one column per entry of `alphas`; `rows[t][c]` is
/// the value of column `c` at `times[t]`.
pub fn write_dynamics_csv<W: Write>(out: W, alphas: &[usize], times: &[f64], rows: &[Vec<f64>]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = std::iter::once("t".to_string()).chain(alphas.iter().map(|a| format!("P_alpha{a}"))).collect();
    w.write_record(&header)?;
    for (t, row) in times.iter().zip(rows) {
        let rec: Vec<String> = std::iter::once(t.to_string()).chain(row.iter().map(|v| v.to_string())).collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `i,j,P` over the full grid, 1-based labels.
pub fn write_corr_snapshot_csv<W: Write>(out: W, grid: &Mat<f64>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "P"])?;
    for i in 0..grid.nrows() {
        for j in 0..grid.ncols() {
            w.serialize((i + 1, j + 1, grid[(i, j)]))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `index,E_minus_E0b` with 1-based indices in ascending energy.
pub fn write_spectrum_csv<W: Write>(out: W, energies: &[f64]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "E_minus_E0b"])?;
    for (i, e) in energies.iter().enumerate() {
        w.serialize((i + 1, e))?;
    }
    w.flush()?;
    Ok(())
}
