use faer::Mat;

use crate::bath::{relative_transform_table, solve_bound_states, BathBands, TwoPhotonBoundState};
use crate::error::Result;
use crate::lattice::{MomentumGrid, PairBasis, QubitPositions};
use crate::params::SystemParams;

/// Everything fixed by the parameters alone: geometry, bases and bath spectra.
#[derive(Debug, Clone)]
pub struct ArraySystem {
    pub params: SystemParams,
    pub positions: QubitPositions,
    pub pairs: PairBasis,
    pub grid: MomentumGrid,
    pub bound_states: Vec<TwoPhotonBoundState>,
    pub bands: BathBands,
    /// `S[K][k]`, see [`relative_transform_table`].
    pub transforms: Mat<f64>,
}

impl ArraySystem {
    pub fn new(params: SystemParams) -> Result<Self> {
        let positions = QubitPositions::centered(&params)?;
        Self::with_positions(params, positions)
    }

    pub fn with_positions(params: SystemParams, positions: QubitPositions) -> Result<Self> {
        let grid = MomentumGrid::new(params.n_cavities)?;
        let bound_states = solve_bound_states(&params, &grid)?;
        let bands = BathBands::new(&params, &grid, &bound_states);
        let transforms = relative_transform_table(&bound_states, &grid);
        Ok(Self {
            pairs: PairBasis::new(positions.len()),
            params,
            positions,
            grid,
            bound_states,
            bands,
            transforms,
        })
    }

    pub fn n_cavities(&self) -> usize {
        self.params.n_cavities
    }

    pub fn n_qubits(&self) -> usize {
        self.positions.len()
    }
}
