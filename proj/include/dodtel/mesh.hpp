#pragma once

#include <span>
#include <vector>

namespace dodtel {

/// Which half of a cut background cell holds the small fraction.
enum class CutSide { SmallLeft, SmallRight };

/// A single cut inside background cell `background_index`, producing cells
/// of size alpha*dx and (1-alpha)*dx ordered according to `side`.
struct Cut {
  int background_index = 0;
  double alpha = 0.5;
  CutSide side = CutSide::SmallLeft;
};

/// Periodic 1D partition obtained by cutting a uniform background grid.
///
/// Cells with |E_i| <= dx/2 form the small-cell set that receives the
/// domain-of-dependence stabilization. All index arithmetic wraps modulo the
/// number of cells. Instances are immutable once built.
class CutCellMesh {
 public:
  /// Throws std::invalid_argument on malformed input: n_background < 4,
  /// alpha outside (0, 1/2), repeated or adjacent background indices.
  static CutCellMesh build(double domain_left, double domain_right,
                           int n_background, std::vector<Cut> cuts = {});

  double domain_left() const { return domain_left_; }
  double domain_right() const { return domain_right_; }
  double length() const { return domain_right_ - domain_left_; }
  int n_background() const { return n_background_; }
  double background_dx() const { return dx_; }

  int num_cells() const { return static_cast<int>(cell_sizes_.size()); }
  const std::vector<double>& vertices() const { return vertices_; }
  const std::vector<double>& cell_sizes() const { return cell_sizes_; }
  double cell_size(int i) const { return cell_sizes_[wrap(i)]; }
  double cell_left(int i) const { return vertices_[wrap(i)]; }
  double cell_right(int i) const { return vertices_[wrap(i) + 1]; }
  double cell_center(int i) const {
    return 0.5 * (cell_left(i) + cell_right(i));
  }

  const std::vector<int>& small_cells() const { return small_cells_; }
  bool is_small(int i) const;
  /// Size of cell i relative to the background spacing.
  double fraction(int i) const { return cell_size(i) / dx_; }

  const std::vector<Cut>& cuts() const { return cuts_; }

  /// Periodic index map into [0, num_cells()).
  int wrap(int i) const {
    const int n = num_cells();
    return ((i % n) + n) % n;
  }

 private:
  CutCellMesh() = default;

  double domain_left_ = 0.0;
  double domain_right_ = 1.0;
  int n_background_ = 0;
  double dx_ = 0.0;
  std::vector<double> vertices_;
  std::vector<double> cell_sizes_;
  std::vector<int> small_cells_;
  std::vector<Cut> cuts_;
};

/// Sorted indices of all cells with |E_i| <= dx/2.
std::vector<int> small_cells(const CutCellMesh& mesh);

/// One cut per entry of `alphas`, placed at evenly spaced background cells
/// (index floor(k * n_background / alphas.size())).
std::vector<Cut> evenly_spaced_cuts(int n_background,
                                    std::span<const double> alphas,
                                    CutSide side = CutSide::SmallLeft,
                                    int offset = 0);

}  // namespace dodtel
