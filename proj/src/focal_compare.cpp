#include "perspcrop/focal_compare.hpp"

#include <cmath>
#include <sstream>

#include "perspcrop/errors.hpp"

namespace perspcrop {

namespace {

constexpr double kStep = 1e-5;
constexpr double kTolerance = 0.01;

} // namespace

FocalComparison compare_focal_options(const CameraIntrinsics& intr,
                                      const std::vector<Eigen::Vector2d>& targets,
                                      const Eigen::Vector2d& s) {
    FocalComparison out;
    for (const auto& p : targets) {
        const CropTarget tgt(p, s);
        for (FocalOption opt : {FocalOption::A, FocalOption::B, FocalOption::C}) {
            const WarpMatrix w = warp_matrix(build_virtual_camera(tgt, intr, opt), intr);
            const WarpMatrix inv = w.inverse();
            auto src = [&](double u, double v) { return warp_point(inv, {u, v}).vec(); };
            const double sx = (src(0.5 + kStep, 0.5) - src(0.5 - kStep, 0.5)).x() / (2 * kStep);
            const double sy = (src(0.5, 0.5 + kStep) - src(0.5, 0.5 - kStep)).y() / (2 * kStep);
            FocalScaleRow row{p, opt, {sx, sy}, {s.x() / sx, s.y() / sy}, false};
            row.preserves_scale = std::abs(row.ratio.x() - 1.0) <= kTolerance &&
                                  std::abs(row.ratio.y() - 1.0) <= kTolerance;
            if (!row.preserves_scale) out.preserved[static_cast<int>(opt)] = false;
            out.rows.push_back(row);
        }
    }
    return out;
}

std::vector<Eigen::Vector2d> target_grid(int n, double extent) {
    if (n < 1) throw InvalidArgument("grid size must be positive");
    if (!(extent >= 0.0)) throw InvalidArgument("grid extent must be >= 0");
    std::vector<Eigen::Vector2d> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double a = n == 1 ? 0.0 : -extent + 2.0 * extent * j / (n - 1);
            const double b = n == 1 ? 0.0 : -extent + 2.0 * extent * i / (n - 1);
            out.emplace_back(a, b);
        }
    return out;
}

std::string FocalComparison::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "px,py,option,scale_x,scale_y,ratio_x,ratio_y,preserves_scale\n";
    for (const auto& r : rows)
        os << r.p.x() << ',' << r.p.y() << ',' << to_string(r.option) << ',' << r.axis_scale.x()
           << ',' << r.axis_scale.y() << ',' << r.ratio.x() << ',' << r.ratio.y() << ','
           << (r.preserves_scale ? "yes" : "no") << '\n';
    return os.str();
}

} // namespace perspcrop
