//! Support-phase tracking and gait events.

/// Which feet touch the ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    Flight,
    Single(usize),
    Double,
}

impl Support {
    pub fn from_contacts(contacts: [bool; 2]) -> Self {
        match contacts {
            [true, true] => Support::Double,
            [true, false] => Support::Single(0),
            [false, true] => Support::Single(1),
            [false, false] => Support::Flight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitEvent {
    /// New stance foot x minus old stance foot x.
    pub length: f64,
    pub new_stance: usize,
}

#[derive(Debug, Clone, Copy)]
struct SingleSupport {
    foot: usize,
    /// Where the swinging foot was when this single support began.
    swing_start_x: f64,
}

/// Emits an event on single(a) -> double -> single(b), b != a, provided the
/// foot that swung moved at least `min_swing` horizontally.
#[derive(Debug, Clone)]
pub struct GaitDetector {
    min_swing: f64,
    last_single: Option<SingleSupport>,
    through_double: bool,
}

impl GaitDetector {
    pub fn new(min_swing: f64) -> Self {
        Self {
            min_swing,
            last_single: None,
            through_double: false,
        }
    }

    pub fn reset(&mut self) {
        self.last_single = None;
        self.through_double = false;
    }

    pub fn update(&mut self, contacts: [bool; 2], foot_x: [f64; 2]) -> Option<GaitEvent> {
        match Support::from_contacts(contacts) {
            Support::Double => {
                if self.last_single.is_some() {
                    self.through_double = true;
                }
                None
            }
            Support::Flight => None,
            Support::Single(foot) => {
                let prev = self.last_single;
                if matches!(prev, Some(p) if p.foot == foot) {
                    self.through_double = false;
                    return None;
                }
                let event = match prev {
                    Some(p)
                        if self.through_double
                            && (foot_x[foot] - p.swing_start_x).abs() >= self.min_swing =>
                    {
                        Some(GaitEvent {
                            length: foot_x[foot] - foot_x[p.foot],
                            new_stance: foot,
                        })
                    }
                    _ => None,
                };
                self.last_single = Some(SingleSupport {
                    foot,
                    swing_start_x: foot_x[1 - foot],
                });
                self.through_double = false;
                event
            }
        }
    }
}
