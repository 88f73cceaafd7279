#include "dodtel/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dodtel {

namespace {

bool periodic_neighbors(int a, int b, int n) {
  const int d = std::abs(a - b);
  return d == 1 || d == n - 1;
}

}  // namespace

CutCellMesh CutCellMesh::build(double domain_left, double domain_right,
                               int n_background, std::vector<Cut> cuts) {
  if (!(domain_right > domain_left)) {
    throw std::invalid_argument("CutCellMesh: domain_right must exceed domain_left");
  }
  if (n_background < 4) {
    throw std::invalid_argument("CutCellMesh: need at least 4 background cells");
  }
  for (const Cut& cut : cuts) {
    if (cut.background_index < 0 || cut.background_index >= n_background) {
      std::ostringstream msg;
      msg << "CutCellMesh: cut index " << cut.background_index
          << " outside [0, " << n_background << ")";
      throw std::invalid_argument(msg.str());
    }
    // alpha == 1/2 would produce two adjacent cells of size dx/2, both small.
    if (!(cut.alpha > 0.0 && cut.alpha < 0.5)) {
      std::ostringstream msg;
      msg << "CutCellMesh: cut fraction " << cut.alpha
          << " in background cell " << cut.background_index
          << " must lie in (0, 1/2)";
      throw std::invalid_argument(msg.str());
    }
  }
  std::sort(cuts.begin(), cuts.end(), [](const Cut& a, const Cut& b) {
    return a.background_index < b.background_index;
  });
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    for (std::size_t l = k + 1; l < cuts.size(); ++l) {
      const int a = cuts[k].background_index;
      const int b = cuts[l].background_index;
      if (a == b || periodic_neighbors(a, b, n_background)) {
        std::ostringstream msg;
        msg << "CutCellMesh: cuts in background cells " << a << " and " << b
            << " overlap or are adjacent";
        throw std::invalid_argument(msg.str());
      }
    }
  }

  CutCellMesh mesh;
  mesh.domain_left_ = domain_left;
  mesh.domain_right_ = domain_right;
  mesh.n_background_ = n_background;
  mesh.dx_ = (domain_right - domain_left) / n_background;
  mesh.cuts_ = cuts;

  auto background_vertex = [&](int k) {
    return k == n_background ? domain_right
                             : domain_left + k * mesh.dx_;
  };

  mesh.vertices_.reserve(n_background + cuts.size() + 1);
  std::size_t next_cut = 0;
  for (int k = 0; k < n_background; ++k) {
    const double x0 = background_vertex(k);
    mesh.vertices_.push_back(x0);
    if (next_cut < cuts.size() && cuts[next_cut].background_index == k) {
      const Cut& cut = cuts[next_cut++];
      const double x1 = background_vertex(k + 1);
      mesh.vertices_.push_back(cut.side == CutSide::SmallLeft
                                   ? x0 + cut.alpha * mesh.dx_
                                   : x1 - cut.alpha * mesh.dx_);
    }
  }
  mesh.vertices_.push_back(domain_right);

  const int n = static_cast<int>(mesh.vertices_.size()) - 1;
  mesh.cell_sizes_.resize(n);
  for (int i = 0; i < n; ++i) {
    mesh.cell_sizes_[i] = mesh.vertices_[i + 1] - mesh.vertices_[i];
    if (!(mesh.cell_sizes_[i] > 0.0)) {
      throw std::invalid_argument("CutCellMesh: degenerate cell produced by cut");
    }
  }
  for (int i = 0; i < n; ++i) {
    if (mesh.cell_sizes_[i] <= 0.5 * mesh.dx_) mesh.small_cells_.push_back(i);
  }
  for (std::size_t k = 0; k + 1 < mesh.small_cells_.size(); ++k) {
    if (periodic_neighbors(mesh.small_cells_[k], mesh.small_cells_[k + 1], n)) {
      throw std::invalid_argument("CutCellMesh: adjacent small cells");
    }
  }
  if (mesh.small_cells_.size() > 1 &&
      periodic_neighbors(mesh.small_cells_.front(), mesh.small_cells_.back(), n)) {
    throw std::invalid_argument("CutCellMesh: adjacent small cells");
  }
  return mesh;
}

bool CutCellMesh::is_small(int i) const {
  return std::binary_search(small_cells_.begin(), small_cells_.end(), wrap(i));
}

std::vector<int> small_cells(const CutCellMesh& mesh) {
  return mesh.small_cells();
}

std::vector<Cut> evenly_spaced_cuts(int n_background,
                                    std::span<const double> alphas,
                                    CutSide side, int offset) {
  std::vector<Cut> cuts;
  const int m = static_cast<int>(alphas.size());
  cuts.reserve(m);
  for (int k = 0; k < m; ++k) {
    const int base = static_cast<int>(
        (static_cast<long long>(k) * n_background) / m);
    const int index = ((base + offset) % n_background + n_background) % n_background;
    cuts.push_back(Cut{index, alphas[k], side});
  }
  return cuts;
}

}  // namespace dodtel
