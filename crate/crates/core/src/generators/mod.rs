//! Example networks: lattices, regular trees, Galton–Watson trees and the
//! path-decorated 3-regular tree with its explicit root law.

mod decorated;
mod gw;
mod lattice;
mod offspring;
mod reversibility;

pub use decorated::{
    classify_decorated, decorated_balanced_tree_conductance, decorated_coords, decorated_exact_probabilities,
    decorated_fixed_root_reversibility, decorated_path_edge, decorated_path_membership, decorated_reversibility,
    decorated_root, decorated_stated_probabilities, decorated_vertex, RootStepClass, DecoratedTreeSource,
    MembershipReport,
};
pub use gw::{survival_fraction, AugmentedGwSource, GaltonWatsonSource, SurvivalEstimate, MAX_REJECTIONS, SURVIVAL_CAP};
pub use lattice::{regular_tree_children, regular_tree_parent, zd_box, zd_box_wired, RegularTreeSource, ZdSource};
pub use offspring::OffspringDistribution;
pub use reversibility::{
    reversibility_report, sample_root_step_classes, source_step, ClassRow, ReversibilityReport,
};
