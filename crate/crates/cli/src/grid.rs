use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// A parameter sweep written `min:max:count:lin|log`, or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn single(value: f64) -> Self {
        Self {
            min: value,
            max: value,
            count: 1,
            spacing: Spacing::Linear,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Parse(format!("invalid grid '{text}': {why}"));
        let number = |s: &str| -> Result<f64, CliError> {
            let v: f64 = s.trim().parse().map_err(|_| bad("expected a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad("values must be finite"))
            }
        };
        let parts: Vec<&str> = text.split(':').collect();
        let grid = match parts.as_slice() {
            [v] => Self::single(number(v)?),
            [lo, hi, n] | [lo, hi, n, _] => {
                let spacing = match parts.get(3).map(|s| s.trim()) {
                    None | Some("lin") | Some("linear") => Spacing::Linear,
                    Some("log") => Spacing::Log,
                    Some(_) => return Err(bad("spacing must be 'lin' or 'log'")),
                };
                let count: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| bad("count must be a positive integer"))?;
                Self {
                    min: number(lo)?,
                    max: number(hi)?,
                    count,
                    spacing,
                }
            }
            _ => return Err(bad("expected min:max:count[:lin|log]")),
        };
        grid.validate().map_err(|e| bad(&e))?;
        Ok(grid)
    }

    fn validate(&self) -> Result<(), String> {
        if self.count == 0 {
            return Err("count must be at least 1".into());
        }
        if self.count > 1 && !(self.min < self.max) {
            return Err("min must be below max".into());
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err("log spacing needs positive bounds".into());
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == self.count - 1 {
                    return self.max;
                }
                let f = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min * (1.0 - f) + self.max * f,
                    Spacing::Log => (self.min.ln() + f * (self.max / self.min).ln()).exp(),
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

/// Comma-separated list, e.g. `0.5,2,3`.
pub fn parse_list<T: FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    let items = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Parse(format!("invalid {what} '{}' in '{text}'", s.trim())))
        })
        .collect::<Result<Vec<T>, _>>()?;
    if items.is_empty() {
        return Err(CliError::Parse(format!("empty {what} list")));
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value() {
        assert_eq!(Grid::parse("2.5").unwrap().points(), vec![2.5]);
    }

    #[test]
    fn log_grid_endpoints() {
        let p = Grid::parse("0.05:5:200:log").unwrap().points();
        assert_eq!(p.len(), 200);
        assert_eq!(p[0], 0.05);
        assert_eq!(p[199], 5.0);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        assert!((p[1] / p[0] - p[199] / p[198]).abs() < 1e-12);
    }

    #[test]
    fn linear_grid() {
        assert_eq!(
            Grid::parse("0:1:5:lin").unwrap().points(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(Grid::parse("0:1:3").unwrap().points(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        for g in [
            "",
            "1:0:3:lin",
            "0:1:0:lin",
            "0:1:3:cubic",
            "0:1:3:log",
            "a:b:c",
            "1:2:3:lin:x",
            "nan",
            "1:inf:2",
        ] {
            assert!(Grid::parse(g).is_err(), "{g}");
        }
    }

    #[test]
    fn extreme_linear_bounds_stay_finite() {
        let p = Grid::parse("-1e308:1e308:3:lin").unwrap().points();
        assert_eq!(p, vec![-1e308, 0.0, 1e308]);
    }

    #[test]
    fn lists() {
        assert_eq!(
            parse_list::<usize>("4, 6,8", "size").unwrap(),
            vec![4, 6, 8]
        );
        assert!(parse_list::<usize>("4,,8", "size").is_err());
    }
}
