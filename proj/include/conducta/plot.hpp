#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

namespace conducta {

/// Series for a posterior plot over the l2 norm of embedding rows. Points are
/// kept in ascending x; `paths` holds one sampled function per column.
struct PlotSpec {
  Eigen::VectorXd x;
  Eigen::VectorXd mean;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  Eigen::MatrixXd paths;
  Eigen::VectorXd train_x;
  Eigen::VectorXd train_y;
  std::string title = "induced conductance";

  /// Equal lengths, finite values and lo <= mean <= hi.
  void validate() const;
};

/// Sorts by x (stable) and sets the band to mean -/+ 2 sd. Throws InputError
/// on an empty prediction set.
PlotSpec make_plot_spec(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::VectorXd& variance,
                        const Eigen::MatrixXd& paths = {}, const Eigen::VectorXd& train_x = {},
                        const Eigen::VectorXd& train_y = {});

/// CSV: x_norm,mean,lo,hi followed by path0.. columns.
void write_plot_csv(std::ostream& out, const PlotSpec& spec);

/// Self-contained SVG document.
void write_plot_svg(std::ostream& out, const PlotSpec& spec, int width = 800, int height = 500);

}  // namespace conducta
