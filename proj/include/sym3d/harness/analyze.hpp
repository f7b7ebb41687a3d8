#pragma once

#include <filesystem>
#include <iosfwd>

#include "sym3d/regularizers.hpp"
#include "sym3d/model.hpp"

namespace sym3d::harness {

struct Analysis {
  MatrixX<double> similarity;  // 3C x 3C over the planes the decoder reads
  SymmetryLossValue<double> rg;
  SymmetryLossValue<double> ra;  // zero when attention is off
};

Analysis analyze(const SceneModel<double>& model);

/// similarity.csv: header "row,ch0,...,ch{3C-1}", one row per stacked channel
/// (xy channels first, then xz, then yz).
void write_similarity_csv(const MatrixX<double>& sim, std::ostream& os);

/// symmetry.csv: header "term,value" with rows rg, rg_yz, rg_xz, ra, ra_yz, ra_xz.
void write_symmetry_csv(const Analysis& a, std::ostream& os);

/// Writes both CSVs plus one PGM per plane channel (plane_<xy|xz|yz>_c<k>.pgm)
/// and per attention map (attention_<xy|xz|yz>.pgm) into `dir`.
Analysis analyze_to_directory(const SceneModel<double>& model, const std::filesystem::path& dir);

}  // namespace sym3d::harness
