//! The seven typesetting forms and their line-anchor rules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::Rect;
use crate::template::{LayerKind, Template, TextRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TypesettingForm {
    CenteredSingle,
    LeftStackedTwo,
    CenteredStackedTwo,
    LeftStackedThree,
    CenteredStackedThree,
    MainWithActionTag,
    Staggered,
}

pub const FORM_COUNT: usize = 7;

impl TypesettingForm {
    pub const ALL: [TypesettingForm; FORM_COUNT] = [
        TypesettingForm::CenteredSingle,
        TypesettingForm::LeftStackedTwo,
        TypesettingForm::CenteredStackedTwo,
        TypesettingForm::LeftStackedThree,
        TypesettingForm::CenteredStackedThree,
        TypesettingForm::MainWithActionTag,
        TypesettingForm::Staggered,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<TypesettingForm> {
        Self::ALL.get(i).copied()
    }

    /// Whether the form lays out exactly `lines` lines.
    pub fn supports(self, lines: usize) -> bool {
        use TypesettingForm::*;
        match self {
            CenteredSingle => lines == 1,
            LeftStackedTwo | CenteredStackedTwo => lines == 2,
            LeftStackedThree | CenteredStackedThree => lines == 3,
            MainWithActionTag | Staggered => lines == 2 || lines == 3,
        }
    }

    fn centered(self) -> bool {
        matches!(
            self,
            TypesettingForm::CenteredSingle
                | TypesettingForm::CenteredStackedTwo
                | TypesettingForm::CenteredStackedThree
        )
    }

    /// Line boxes inside `area`, one per entry of `widths` (pixels), in
    /// line order. Widths are clamped to the area.
    pub fn place(self, area: &Rect, widths: &[f64]) -> Vec<Rect> {
        let n = widths.len();
        if n == 0 {
            return Vec::new();
        }
        let w = |i: usize| widths[i].clamp(0.0, area.w);
        let stacked = |top: f64, height: f64, count: usize, i: usize| {
            let row = height / count as f64;
            (top + i as f64 * row + 0.1 * row, 0.8 * row)
        };
        (0..n)
            .map(|i| {
                let width = w(i);
                match self {
                    TypesettingForm::MainWithActionTag if n >= 2 => {
                        let head = 0.7 * area.h;
                        let (y, h) = if i + 1 < n {
                            stacked(area.y, head, n - 1, i)
                        } else {
                            stacked(area.y + head, area.h - head, 1, 0)
                        };
                        Rect::new(area.x, y, width, h)
                    }
                    TypesettingForm::Staggered if n >= 2 => {
                        let (y, h) = stacked(area.y, area.h, n, i);
                        let x = area.x + (area.w - width) * i as f64 / (n - 1) as f64;
                        Rect::new(x, y, width, h)
                    }
                    _ => {
                        let (y, h) = stacked(area.y, area.h, n, i);
                        let x = if self.centered() { area.x + (area.w - width) / 2.0 } else { area.x };
                        Rect::new(x, y, width, h)
                    }
                }
            })
            .collect()
    }

    /// Reads the form a designer used from the template's text layers.
    pub fn infer(t: &Template) -> Option<TypesettingForm> {
        let lines: Vec<Rect> = TextRole::ALL.iter().filter_map(|r| t.text_layer(*r)).map(|l| l.bbox).collect();
        let n = lines.len();
        match n {
            0 => None,
            1 => Some(TypesettingForm::CenteredSingle),
            _ => {
                let has_tag = t.text_layer(TextRole::Action).is_some()
                    && t.layers.iter().any(|l| l.kind == LayerKind::MaskAction);
                let within = |f: fn(&Rect) -> f64| {
                    let first = f(&lines[0]);
                    lines.iter().all(|r| (f(r) - first).abs() <= 4.0)
                };
                let form = if has_tag {
                    TypesettingForm::MainWithActionTag
                } else if within(|r| r.x) {
                    if n == 2 {
                        TypesettingForm::LeftStackedTwo
                    } else {
                        TypesettingForm::LeftStackedThree
                    }
                } else if within(|r| r.center().0) {
                    if n == 2 {
                        TypesettingForm::CenteredStackedTwo
                    } else {
                        TypesettingForm::CenteredStackedThree
                    }
                } else {
                    TypesettingForm::Staggered
                };
                Some(form)
            }
        }
    }
}

impl fmt::Display for TypesettingForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for TypesettingForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.iter().copied().find(|f| f.to_string() == s).ok_or_else(|| format!("unknown typesetting form {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_forms_with_stable_indices() {
        for (i, f) in TypesettingForm::ALL.iter().enumerate() {
            assert_eq!(f.index(), i);
            assert_eq!(f.to_string().parse::<TypesettingForm>().unwrap(), *f);
        }
    }

    #[test]
    fn every_line_count_has_a_form() {
        for n in 1..=3 {
            assert!(TypesettingForm::ALL.iter().any(|f| f.supports(n)));
        }
    }

    #[test]
    fn centered_single_is_horizontally_centered() {
        let area = Rect::new(100.0, 50.0, 400.0, 100.0);
        let r = TypesettingForm::CenteredSingle.place(&area, &[200.0]);
        assert_eq!(r, vec![Rect::new(200.0, 60.0, 200.0, 80.0)]);
    }

    #[test]
    fn left_stacked_three_has_equal_gaps() {
        let area = Rect::new(0.0, 0.0, 300.0, 300.0);
        let r = TypesettingForm::LeftStackedThree.place(&area, &[300.0, 150.0, 90.0]);
        assert_eq!(r[0], Rect::new(0.0, 10.0, 300.0, 80.0));
        assert_eq!(r[1], Rect::new(0.0, 110.0, 150.0, 80.0));
        assert_eq!(r[2], Rect::new(0.0, 210.0, 90.0, 80.0));
        let gap1 = r[1].y - r[0].bottom();
        let gap2 = r[2].y - r[1].bottom();
        assert_eq!(gap1, gap2);
    }

    #[test]
    fn staggered_steps_right() {
        let area = Rect::new(0.0, 0.0, 300.0, 300.0);
        let r = TypesettingForm::Staggered.place(&area, &[100.0, 100.0, 100.0]);
        assert_eq!((r[0].x, r[1].x, r[2].x), (0.0, 100.0, 200.0));
    }

    #[test]
    fn action_tag_sits_in_the_bottom_band() {
        let area = Rect::new(0.0, 0.0, 200.0, 100.0);
        let r = TypesettingForm::MainWithActionTag.place(&area, &[200.0, 80.0]);
        assert!(r[1].y >= 70.0);
        assert!(r[0].bottom() <= 70.0);
    }
}
