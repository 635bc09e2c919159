//! Re-targeting a chosen template: size expansion, text re-layout and
//! product arrangement.

mod expand;
mod products;
mod textnet;
mod typeset;

pub use expand::{aspect_angle_difference, aspect_gate, expand_size, ExpandError, ASPECT_GATE_DEGREES};
pub use products::{
    choose_layout, fit_rotated, layout_products, layout_slots, slot_overlap, ProductLayout, ProductPlan, SlotPlacement,
    FAN_STEP_DEGREES, INCLINE_DEGREES, MAX_SLOT_OVERLAP,
};
pub use textnet::{
    layout_text, sample_from_template, samples_from_library, softmax, text_features, train_text_net, Dense, Prediction,
    TextLayout, TextLayoutNet, TextNetConfig, TextNetError, TextSample, INPUT_DIM, OUTPUT_DIM, WIDTH_CLAMP,
};
pub use typeset::{TypesettingForm, FORM_COUNT};
