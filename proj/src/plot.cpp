#include "conducta/plot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <vector>

#include "conducta/error.hpp"
#include "conducta/io.hpp"

namespace conducta {

void PlotSpec::validate() const {
  const auto n = x.size();
  if (n == 0) throw InputError("plot: empty prediction set");
  if (mean.size() != n || lo.size() != n || hi.size() != n || (paths.size() != 0 && paths.rows() != n)) {
    throw InputError("plot: series lengths differ");
  }
  if (train_x.size() != train_y.size()) throw InputError("plot: training series lengths differ");
  if (!x.allFinite() || !mean.allFinite() || !lo.allFinite() || !hi.allFinite() || !paths.allFinite()) {
    throw InputError("plot: non-finite series value");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(lo[i] <= mean[i] && mean[i] <= hi[i])) throw InputError("plot: band does not contain the mean");
  }
}

PlotSpec make_plot_spec(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::VectorXd& variance,
                        const Eigen::MatrixXd& paths, const Eigen::VectorXd& train_x, const Eigen::VectorXd& train_y) {
  const auto n = x.size();
  if (n == 0) throw InputError("plot: empty prediction set");
  if (mean.size() != n || variance.size() != n) throw InputError("plot: series lengths differ");
  if (paths.size() != 0 && paths.rows() != n) throw InputError("plot: sample paths do not match the prediction set");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });

  PlotSpec spec;
  spec.x.resize(n);
  spec.mean.resize(n);
  spec.lo.resize(n);
  spec.hi.resize(n);
  spec.paths.resize(paths.size() == 0 ? 0 : n, paths.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = order[static_cast<std::size_t>(i)];
    const double sd = 2.0 * std::sqrt(std::max(variance[k], 0.0));
    spec.x[i] = x[k];
    spec.mean[i] = mean[k];
    spec.lo[i] = mean[k] - sd;
    spec.hi[i] = mean[k] + sd;
    if (paths.size() != 0) spec.paths.row(i) = paths.row(k);
  }
  spec.train_x = train_x;
  spec.train_y = train_y;
  spec.validate();
  return spec;
}

void write_plot_csv(std::ostream& out, const PlotSpec& spec) {
  spec.validate();
  out << "x_norm,mean,lo,hi";
  for (Eigen::Index p = 0; p < spec.paths.cols(); ++p) out << ",path" << p;
  out << '\n';
  for (Eigen::Index i = 0; i < spec.x.size(); ++i) {
    out << format_real(spec.x[i]) << ',' << format_real(spec.mean[i]) << ',' << format_real(spec.lo[i]) << ','
        << format_real(spec.hi[i]);
    for (Eigen::Index p = 0; p < spec.paths.cols(); ++p) out << ',' << format_real(spec.paths(i, p));
    out << '\n';
  }
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

struct Frame {
  double x0, x1, y0, y1;
  double left, top, w, h;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * w; }
  double py(double y) const { return top + h - (y - y0) / (y1 - y0) * h; }
};

std::string coord(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

}  // namespace

void write_plot_svg(std::ostream& out, const PlotSpec& spec, int width, int height) {
  spec.validate();
  const auto n = spec.x.size();

  double xmin = spec.x.minCoeff(), xmax = spec.x.maxCoeff();
  double ymin = spec.lo.minCoeff(), ymax = spec.hi.maxCoeff();
  if (spec.train_x.size() > 0) {
    xmin = std::min(xmin, spec.train_x.minCoeff());
    xmax = std::max(xmax, spec.train_x.maxCoeff());
    ymin = std::min(ymin, spec.train_y.minCoeff());
    ymax = std::max(ymax, spec.train_y.maxCoeff());
  }
  if (spec.paths.size() > 0) {
    ymin = std::min(ymin, spec.paths.minCoeff());
    ymax = std::max(ymax, spec.paths.maxCoeff());
  }
  if (xmax <= xmin) { xmin -= 0.5; xmax += 0.5; }
  if (ymax <= ymin) { ymin -= 0.5; ymax += 0.5; }
  const double ypad = 0.05 * (ymax - ymin);
  const Frame f{xmin, xmax, ymin - ypad, ymax + ypad, 70.0, 40.0, width - 100.0, height - 100.0};

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << escape_xml(spec.title) << "</text>\n";

  // axes and ticks
  out << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << coord(f.left) << "\" y1=\"" << coord(f.top + f.h) << "\" x2=\"" << coord(f.left + f.w)
      << "\" y2=\"" << coord(f.top + f.h) << "\"/>\n"
      << "<line x1=\"" << coord(f.left) << "\" y1=\"" << coord(f.top) << "\" x2=\"" << coord(f.left)
      << "\" y2=\"" << coord(f.top + f.h) << "\"/>\n</g>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int t = 0; t <= 5; ++t) {
    const double xv = f.x0 + (f.x1 - f.x0) * t / 5.0;
    const double yv = f.y0 + (f.y1 - f.y0) * t / 5.0;
    out << "<text x=\"" << coord(f.px(xv)) << "\" y=\"" << coord(f.top + f.h + 16)
        << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n"
        << "<text x=\"" << coord(f.left - 6) << "\" y=\"" << coord(f.py(yv) + 4) << "\" text-anchor=\"end\">"
        << tick_label(yv) << "</text>\n";
  }
  out << "<text x=\"" << coord(f.left + f.w / 2) << "\" y=\"" << height - 20
      << "\" text-anchor=\"middle\">l2 norm of embedding</text>\n"
      << "<text transform=\"translate(18," << coord(f.top + f.h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">conductance</text>\n</g>\n";

  // band
  out << "<path d=\"M";
  for (Eigen::Index i = 0; i < n; ++i) out << (i ? " L" : "") << coord(f.px(spec.x[i])) << ',' << coord(f.py(spec.hi[i]));
  for (Eigen::Index i = n - 1; i >= 0; --i) out << " L" << coord(f.px(spec.x[i])) << ',' << coord(f.py(spec.lo[i]));
  out << " Z\" fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\"/>\n";

  auto polyline = [&](auto value, const char* color, double stroke) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << stroke << "\" points=\"";
    for (Eigen::Index i = 0; i < n; ++i) out << (i ? " " : "") << coord(f.px(spec.x[i])) << ',' << coord(f.py(value(i)));
    out << "\"/>\n";
  };
  for (Eigen::Index p = 0; p < spec.paths.cols(); ++p) {
    polyline([&](Eigen::Index i) { return spec.paths(i, p); }, "#fd8d3c", 0.8);
  }
  polyline([&](Eigen::Index i) { return spec.mean[i]; }, "#08519c", 2.0);

  out << "<g fill=\"black\">\n";
  for (Eigen::Index i = 0; i < spec.train_x.size(); ++i) {
    out << "<circle cx=\"" << coord(f.px(spec.train_x[i])) << "\" cy=\"" << coord(f.py(spec.train_y[i]))
        << "\" r=\"3\"/>\n";
  }
  out << "</g>\n</svg>\n";
}

}  // namespace conducta
