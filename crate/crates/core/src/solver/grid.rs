use crate::error::{Error, Result};

/// How cell widths are laid out; kept so the grid can be extended in kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Uniform { h: f64 },
    /// First cell `h0`, each next cell wider by `growth`.
    Graded { h0: f64, growth: f64 },
}

/// Cells `[f_i, f_(i+1)]` covering `[0, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    faces: Vec<f64>,
    spacing: Spacing,
}

impl Grid {
    /// Uniform cells of width `h`; the last face is the first multiple of `h` at or past `x_max`.
    pub fn uniform(h: f64, x_max: f64) -> Result<Self> {
        if !(h > 0.0) || !(x_max > h) {
            return Err(Error::Parameter {
                name: "grid",
                reason: format!("need 0 < h < x_max (got h={h}, x_max={x_max})"),
            });
        }
        let cells = (x_max / h - 1e-9).ceil() as usize;
        let faces = (0..=cells).map(|i| i as f64 * h).collect();
        Ok(Self {
            faces,
            spacing: Spacing::Uniform { h },
        })
    }

    pub fn graded(h0: f64, growth: f64, x_max: f64) -> Result<Self> {
        if !(h0 > 0.0) || !(growth >= 1.0) || !(x_max > h0) {
            return Err(Error::Parameter {
                name: "grid",
                reason: format!(
                    "need h0 > 0, growth >= 1, x_max > h0 (got {h0}, {growth}, {x_max})"
                ),
            });
        }
        let mut grid = Self {
            faces: vec![0.0, h0],
            spacing: Spacing::Graded { h0, growth },
        };
        grid.grow_to(x_max);
        Ok(grid)
    }

    fn next_width(&self) -> f64 {
        match self.spacing {
            Spacing::Uniform { h } => h,
            Spacing::Graded { growth, .. } => self.width(self.len() - 1) * growth,
        }
    }

    fn grow_to(&mut self, x_max: f64) {
        while self.x_max() < x_max * (1.0 - 1e-12) {
            let next = match self.spacing {
                Spacing::Uniform { h } => self.len() as f64 * h + h,
                Spacing::Graded { .. } => self.x_max() + self.next_width(),
            };
            self.faces.push(next);
        }
    }

    /// Same grid continued with its own spacing up to at least `x_max`.
    pub fn extended(&self, x_max: f64) -> Self {
        let mut g = self.clone();
        g.grow_to(x_max);
        g
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.faces.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn x_max(&self) -> f64 {
        *self.faces.last().expect("grid has faces")
    }

    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.faces[i] + self.faces[i + 1])
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.faces[i + 1] - self.faces[i]
    }

    /// Index of the cell containing `x`, clamped to the grid.
    pub fn locate(&self, x: f64) -> usize {
        self.faces
            .partition_point(|&f| f <= x)
            .saturating_sub(1)
            .min(self.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_layout() {
        let g = Grid::uniform(0.01, 1.0).unwrap();
        assert_eq!(g.len(), 100);
        assert!((g.x_max() - 1.0).abs() < 1e-12);
        assert!((g.center(0) - 0.005).abs() < 1e-15);
        assert_eq!(g.locate(0.0), 0);
        assert_eq!(g.locate(0.015), 1);
        assert_eq!(g.locate(5.0), 99);
    }

    #[test]
    fn graded_layout_and_extension() {
        let g = Grid::graded(1e-3, 1.01, 100.0).unwrap();
        assert!(g.x_max() >= 100.0);
        assert!(g.faces().windows(2).all(|w| w[1] > w[0]));
        assert!((g.width(1) / g.width(0) - 1.01).abs() < 1e-12);
        let e = g.extended(250.0);
        assert_eq!(&e.faces()[..g.faces().len()], g.faces());
        assert!((e.width(g.len()) / e.width(g.len() - 1) - 1.01).abs() < 1e-9);
        assert!(e.x_max() >= 250.0);
    }

    #[test]
    fn uniform_extension_keeps_spacing() {
        let g = Grid::uniform(0.5, 3.0).unwrap();
        let e = g.extended(4.4);
        assert_eq!(e.len(), 9);
        assert_eq!(&e.faces()[..7], g.faces());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(Grid::uniform(0.0, 1.0).is_err());
        assert!(Grid::graded(1e-3, 0.9, 1.0).is_err());
    }
}
