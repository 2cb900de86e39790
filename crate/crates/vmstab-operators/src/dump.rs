use std::io::{self, Write};

use vmstab_inertia::DMatrix;

/// Row-major CSV with a comment header carrying lambda, basis size and a
/// grid hash.
pub fn write_matrix_csv<W: Write>(
    mut w: W,
    matrix: &DMatrix<f64>,
    lambda: f64,
    modes: usize,
    grid_hash: &str,
) -> io::Result<()> {
    writeln!(w, "# lambda={lambda:e} modes={modes} rows={} cols={} grid={grid_hash}", matrix.nrows(), matrix.ncols())?;
    for r in 0..matrix.nrows() {
        let line: Vec<String> = (0..matrix.ncols()).map(|c| format!("{:e}", matrix[(r, c)])).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
