#include "perspcrop/diffcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/LU>

#include "perspcrop/image_warp.hpp"
#include "perspcrop/mlp.hpp"
#include "perspcrop/random.hpp"

namespace perspcrop {

Jacobian finite_difference(const VectorFunction& f, const Eigen::VectorXd& x, double h) {
    if (!(h > 0.0)) throw InvalidArgument("finite_difference step must be positive");
    Jacobian jac;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const Eigen::VectorXd d = (f(xp) - f(xm)) / (2.0 * h);
        if (i == 0) jac.entries.resize(d.size(), x.size());
        jac.entries.col(i) = d;
        jac.col_labels.push_back("x" + std::to_string(i));
    }
    for (Eigen::Index r = 0; r < jac.entries.rows(); ++r) jac.row_labels.push_back("f" + std::to_string(r));
    return jac;
}

double max_relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric,
                          double floor) {
    if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols())
        throw InvalidArgument("max_relative_error: shape mismatch");
    double worst = 0.0;
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        const double a = analytic.data()[i], n = numeric.data()[i];
        const double denom = std::max({std::abs(a), std::abs(n), floor});
        worst = std::max(worst, std::abs(a - n) / denom);
    }
    return worst;
}

namespace {

const std::vector<std::string> kParamLabels{"px", "py", "sx", "sy"};

std::vector<std::string> matrix_labels(const std::string& name) {
    std::vector<std::string> out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            out.push_back(name + "(" + std::to_string(r) + "," + std::to_string(c) + ")");
    return out;
}

// dR/dpx and dR/dpy as 3x3 matrices.
std::array<Eigen::Matrix3d, 2> rotation_partials(const Eigen::Vector2d& p) {
    const double px = p.x(), py = p.y();
    const double a = std::sqrt(1.0 + px * px);
    const double b = std::sqrt(1.0 + px * px + py * py);
    const double a3 = a * a * a, b3 = b * b * b;
    Eigen::Matrix3d dx, dy;
    dx << -px / a3,
          -py / (a * b) + px * px * py * (1.0 / (a3 * b) + 1.0 / (a * b3)),
          1.0 / b - px * px / b3,
          0.0,
          px / (a * b) - a * px / b3,
          -px * py / b3,
          -1.0 / a + px * px / a3,
          px * py * (1.0 / (a3 * b) + 1.0 / (a * b3)),
          -px / b3;
    dy << 0.0,
          -px / (a * b) + px * py * py / (a * b3),
          -px * py / b3,
          0.0,
          -a * py / b3,
          1.0 / b - py * py / b3,
          0.0,
          -1.0 / (a * b) + py * py / (a * b3),
          -py / b3;
    return {dx, dy};
}

// d(h_virt)/d(px, py): column 0 is d/dpx, column 1 is d/dpy.
Eigen::Matrix2d focal_partials(const CameraIntrinsics& intr, const Eigen::Vector2d& p,
                               FocalOption opt) {
    const double px = p.x(), py = p.y();
    const double a = std::sqrt(1.0 + px * px);
    const double b = std::sqrt(1.0 + px * px + py * py);
    const double fx = intr.fx(), fy = intr.fy();
    Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
    switch (opt) {
    case FocalOption::A: break;
    case FocalOption::B:
        d << fx * px / b, fx * py / b,
             fy * px / b, fy * py / b;
        break;
    case FocalOption::C:
        d << fx * (px * a / b + b * px / a), fx * a * py / b,
             fy * (px / a - py * py * px / (a * a * a)), fy * 2.0 * py / a;
        break;
    }
    return d;
}

// d(K_virt)/d(px, py, sx, sy).
std::array<Eigen::Matrix3d, 4> virtual_intrinsics_partials(const CameraIntrinsics& intr,
                                                           const CropTarget& tgt, FocalOption opt,
                                                           bool preserve_aspect) {
    const Eigen::Vector2d h = virtual_focal(tgt, intr, opt);
    const Eigen::Vector2d s = tgt.s();
    const Eigen::Matrix2d dh = focal_partials(intr, tgt.p(), opt);
    // Rows: fvx, fvy. Columns: px, py, sx, sy.
    Eigen::Matrix<double, 2, 4> df;
    df << dh(0, 0) / s.x(), dh(0, 1) / s.x(), -h.x() / (s.x() * s.x()), 0.0,
          dh(1, 0) / s.y(), dh(1, 1) / s.y(), 0.0, -h.y() / (s.y() * s.y());
    if (preserve_aspect) {
        const int pick = (h.x() / s.x() <= h.y() / s.y()) ? 0 : 1;
        df.row(1 - pick) = df.row(pick);
    }
    std::array<Eigen::Matrix3d, 4> out;
    for (int k = 0; k < 4; ++k) {
        out[k].setZero();
        out[k](0, 0) = df(0, k);
        out[k](1, 1) = df(1, k);
    }
    return out;
}

std::array<Eigen::Matrix3d, 4> warp_partials(const CameraIntrinsics& intr, const CropTarget& tgt,
                                             FocalOption opt, bool preserve_aspect) {
    const VirtualCamera vc = build_virtual_camera(tgt, intr, opt, preserve_aspect);
    const Eigen::Matrix3d rt = vc.rotation.matrix().transpose();
    const Eigen::Matrix3d kinv = intr.inverse_matrix();
    const Eigen::Matrix3d kv = vc.intr.as_matrix();
    const auto dk = virtual_intrinsics_partials(intr, tgt, opt, preserve_aspect);
    const auto dr = rotation_partials(tgt.p());
    std::array<Eigen::Matrix3d, 4> out;
    for (int k = 0; k < 4; ++k) {
        out[k] = dk[k] * rt * kinv;
        if (k < 2) out[k] += kv * dr[k].transpose() * kinv;
    }
    return out;
}

Jacobian pack(const std::array<Eigen::Matrix3d, 4>& partials, const std::string& name) {
    Jacobian jac{Eigen::MatrixXd(9, 4), matrix_labels(name), kParamLabels};
    for (int k = 0; k < 4; ++k)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) jac.entries(r * 3 + c, k) = partials[k](r, c);
    return jac;
}

} // namespace

Jacobian d_rotation_d_p(const Eigen::Vector2d& p) {
    const auto d = rotation_partials(p);
    Jacobian jac{Eigen::MatrixXd(9, 2), matrix_labels("R"), {"px", "py"}};
    for (int k = 0; k < 2; ++k)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) jac.entries(r * 3 + c, k) = d[k](r, c);
    return jac;
}

Jacobian d_warp_d_params(const CameraIntrinsics& intr, const CropTarget& tgt, FocalOption opt,
                         bool preserve_aspect) {
    return pack(warp_partials(intr, tgt, opt, preserve_aspect), "G");
}

Jacobian d_warp_inverse_d_params(const CameraIntrinsics& intr, const CropTarget& tgt,
                                 FocalOption opt, bool preserve_aspect) {
    const WarpMatrix w = warp_matrix(build_virtual_camera(tgt, intr, opt, preserve_aspect), intr);
    auto d = warp_partials(intr, tgt, opt, preserve_aspect);
    for (auto& m : d) m = -w.m_inv * m * w.m_inv;
    return pack(d, "Ginv");
}

Eigen::VectorXd warp_entries(const CameraIntrinsics& intr, const Eigen::Vector4d& params,
                             FocalOption opt, bool preserve_aspect) {
    const CropTarget tgt(params.head<2>(), params.tail<2>());
    const WarpMatrix w = warp_matrix(build_virtual_camera(tgt, intr, opt, preserve_aspect), intr);
    Eigen::VectorXd out(9);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out[r * 3 + c] = w.m(r, c);
    return out;
}

Jacobian d_crop_d_params(const Image& img, const CameraIntrinsics& intr, const CropTarget& tgt,
                         FocalOption opt, int out_height, int out_width) {
    const VirtualCamera vc = build_virtual_camera(tgt, intr, opt, false);
    const WarpMatrix w = warp_matrix(vc, intr);
    const SampleGrid grid = make_grid(w, out_height, out_width);
    const GridGradient gg = grad_bilinear(img, grid);
    const Jacobian dinv = d_warp_inverse_d_params(intr, tgt, opt, false);
    const int c = img.channels();

    Jacobian jac;
    jac.entries.resize(static_cast<Eigen::Index>(grid.size()) * c, 4);
    jac.col_labels = kParamLabels;
    jac.row_labels.reserve(grid.size() * c);
    for (int i = 0; i < out_height; ++i) {
        for (int j = 0; j < out_width; ++j) {
            const Eigen::Vector3d q((j + 0.5) / out_width, (i + 0.5) / out_height, 1.0);
            const Eigen::Vector3d x = w.m_inv * q;
            const std::size_t s = static_cast<std::size_t>(i) * out_width + j;
            for (int k = 0; k < 4; ++k) {
                Eigen::Matrix3d dm;
                for (int r = 0; r < 3; ++r)
                    for (int cc = 0; cc < 3; ++cc) dm(r, cc) = dinv.entries(r * 3 + cc, k);
                const Eigen::Vector3d dx = dm * q;
                const double dgx = (dx.x() * x.z() - x.x() * dx.z()) / (x.z() * x.z());
                const double dgy = (dx.y() * x.z() - x.y() * dx.z()) / (x.z() * x.z());
                for (int ch = 0; ch < c; ++ch)
                    jac.entries(static_cast<Eigen::Index>(s * c + ch), k) =
                        gg.dx[s * c + ch] * dgx + gg.dy[s * c + ch] * dgy;
            }
            for (int ch = 0; ch < c; ++ch)
                jac.row_labels.push_back("pix(" + std::to_string(i) + "," + std::to_string(j) +
                                         "," + std::to_string(ch) + ")");
        }
    }
    return jac;
}

namespace {

CameraIntrinsics random_camera(Rng& rng) {
    return {rng.uniform(0.4, 1.6), rng.uniform(0.4, 1.6), rng.uniform(0.35, 0.65),
            rng.uniform(0.35, 0.65), 1000, 1000};
}

CropTarget random_target(Rng& rng) {
    return CropTarget({rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8)},
                      {rng.uniform(0.15, 0.8), rng.uniform(0.15, 0.8)});
}

// Smooth 3-channel test pattern.
Image smooth_image(Rng& rng, int h, int w) {
    Image img(h, w, 3);
    double fr[3][4];
    for (auto& row : fr)
        for (double& v : row) v = rng.uniform(0.5, 2.5);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            for (int c = 0; c < 3; ++c) {
                const double u = (j + 0.5) / w, v = (i + 0.5) / h;
                img.at(i, j, c) = 0.5 + 0.25 * std::sin(fr[c][0] * 6.0 * u + fr[c][1]) *
                                            std::cos(fr[c][2] * 6.0 * v + fr[c][3]);
            }
    return img;
}

// True when the sample moves between pixel cells across the perturbation, or
// sits on a lattice line; such entries have no classical derivative.
bool crosses_lattice(double a, double b, int size) {
    const double pa = a * size - 0.5, pb = b * size - 0.5;
    return std::floor(pa) != std::floor(pb) ||
           std::abs(pa - std::nearbyint(pa)) < 1e-6 || std::abs(pb - std::nearbyint(pb)) < 1e-6;
}

} // namespace

std::vector<GradcheckEntry> run_gradcheck(const GradcheckOptions& opts) {
    Rng rng(opts.seed);
    std::vector<GradcheckEntry> out;

    GradcheckEntry rot{"d_rotation_d_p", 0.0, 1e-5, 0};
    GradcheckEntry warp{"d_warp_d_params", 0.0, 1e-5, 0};
    GradcheckEntry warp_inv{"d_warp_inverse_d_params", 0.0, 1e-5, 0};
    for (int n = 0; n < opts.geometry_configs; ++n) {
        const CameraIntrinsics intr = random_camera(rng);
        const CropTarget tgt = random_target(rng);
        const auto opt = static_cast<FocalOption>(n % 3);
        const bool aspect = (n % 7) == 3;

        const Eigen::VectorXd p = tgt.p();
        const Jacobian num_r = finite_difference(
            [](const Eigen::VectorXd& x) {
                const Eigen::Matrix3d r = rotation_from_target(x).matrix();
                Eigen::VectorXd v(9);
                for (int i = 0; i < 9; ++i) v[i] = r(i / 3, i % 3);
                return v;
            },
            p, kGeometryStep);
        rot.max_rel_error = std::max(rot.max_rel_error, max_relative_error(d_rotation_d_p(tgt.p()).entries, num_r.entries));

        Eigen::VectorXd params(4);
        params << tgt.p(), tgt.s();
        // Skip the kink of min() when the two focal lengths nearly tie.
        const Eigen::Vector2d fv = virtual_focal(tgt, intr, opt).cwiseQuotient(tgt.s());
        const bool near_tie = aspect && std::abs(fv.x() - fv.y()) < 1e-3 * fv.maxCoeff();
        if (!near_tie) {
            const Jacobian num_w = finite_difference(
                [&](const Eigen::VectorXd& x) { return warp_entries(intr, x, opt, aspect); }, params,
                kGeometryStep);
            warp.max_rel_error = std::max(warp.max_rel_error,
                max_relative_error(d_warp_d_params(intr, tgt, opt, aspect).entries, num_w.entries));
            const Jacobian num_wi = finite_difference(
                [&](const Eigen::VectorXd& x) {
                    const CropTarget t(x.head<2>(), x.tail<2>());
                    const WarpMatrix w = warp_matrix(build_virtual_camera(t, intr, opt, aspect), intr);
                    Eigen::VectorXd v(9);
                    for (int i = 0; i < 9; ++i) v[i] = w.m_inv(i / 3, i % 3);
                    return v;
                },
                params, kGeometryStep);
            warp_inv.max_rel_error = std::max(warp_inv.max_rel_error,
                max_relative_error(d_warp_inverse_d_params(intr, tgt, opt, aspect).entries, num_wi.entries));
            warp.checked++;
            warp_inv.checked++;
        }
        rot.checked++;
    }
    out.push_back(rot);
    out.push_back(warp);
    out.push_back(warp_inv);

    // Bilinear sampling w.r.t. grid coordinates, step of 1e-4 pixel.
    GradcheckEntry bil{"grad_bilinear", 0.0, 1e-5, 0};
    GradcheckEntry crop{"d_crop_d_params", 0.0, 1e-4, 0};
    for (int n = 0; n < opts.image_configs; ++n) {
        const int h = 40 + 8 * n, w = 48 + 4 * n;
        const Image img = smooth_image(rng, h, w);
        SampleGrid grid{opts.crop_size, opts.crop_size, {}, {}};
        for (int s = 0; s < opts.crop_size * opts.crop_size; ++s) {
            grid.x.push_back(rng.uniform(-0.05, 1.05));
            grid.y.push_back(rng.uniform(-0.05, 1.05));
        }
        const GridGradient gg = grad_bilinear(img, grid);
        const double hx = kPixelStep / w, hy = kPixelStep / h;
        auto shifted = [&](double dx, double dy) {
            SampleGrid g = grid;
            for (auto& v : g.x) v += dx;
            for (auto& v : g.y) v += dy;
            return bilinear_sample(img, g);
        };
        const Image xp = shifted(hx, 0), xm = shifted(-hx, 0), yp = shifted(0, hy), ym = shifted(0, -hy);
        for (std::size_t s = 0; s < grid.size(); ++s) {
            const bool skip_x = crosses_lattice(grid.x[s] - hx, grid.x[s] + hx, w) ||
                                crosses_lattice(grid.y[s], grid.y[s], h);
            const bool skip_y = crosses_lattice(grid.y[s] - hy, grid.y[s] + hy, h) ||
                                crosses_lattice(grid.x[s], grid.x[s], w);
            for (int ch = 0; ch < img.channels(); ++ch) {
                const std::size_t k = s * img.channels() + ch;
                if (!skip_x) {
                    const double num = (xp.data()[k] - xm.data()[k]) / (2.0 * hx);
                    bil.max_rel_error = std::max(bil.max_rel_error,
                        max_relative_error(Eigen::MatrixXd::Constant(1, 1, gg.dx[k]), Eigen::MatrixXd::Constant(1, 1, num)));
                    bil.checked++;
                }
                if (!skip_y) {
                    const double num = (yp.data()[k] - ym.data()[k]) / (2.0 * hy);
                    bil.max_rel_error = std::max(bil.max_rel_error,
                        max_relative_error(Eigen::MatrixXd::Constant(1, 1, gg.dy[k]), Eigen::MatrixXd::Constant(1, 1, num)));
                    bil.checked++;
                }
            }
        }

        // End-to-end crop Jacobian. Entries whose sample point changes pixel
        // cell under the perturbation are excluded.
        const CameraIntrinsics intr(rng.uniform(0.5, 1.2), rng.uniform(0.5, 1.2), 0.5, 0.5, w, h);
        const CropTarget tgt({rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)},
                             {rng.uniform(0.3, 0.6), rng.uniform(0.3, 0.6)});
        const auto opt = static_cast<FocalOption>(n % 3);
        const int cs = opts.crop_size;
        const Jacobian analytic = d_crop_d_params(img, intr, tgt, opt, cs, cs);
        Eigen::Vector4d params;
        params << tgt.p(), tgt.s();
        const double step = kGeometryStep;
        double col_scale[4];
        for (int k = 0; k < 4; ++k) col_scale[k] = analytic.entries.col(k).cwiseAbs().maxCoeff();
        for (int k = 0; k < 4; ++k) {
            Eigen::Vector4d pp = params, pm = params;
            pp[k] += step;
            pm[k] -= step;
            auto grid_for = [&](const Eigen::Vector4d& x) {
                const CropTarget t(x.head<2>(), x.tail<2>());
                return make_grid(warp_matrix(build_virtual_camera(t, intr, opt, false), intr), cs, cs);
            };
            const SampleGrid gp = grid_for(pp), gm = grid_for(pm);
            const Image ip = bilinear_sample(img, gp), im = bilinear_sample(img, gm);
            for (std::size_t s = 0; s < gp.size(); ++s) {
                if (crosses_lattice(gm.x[s], gp.x[s], w) || crosses_lattice(gm.y[s], gp.y[s], h)) continue;
                for (int ch = 0; ch < img.channels(); ++ch) {
                    const std::size_t r = s * img.channels() + ch;
                    const double num = (ip.data()[r] - im.data()[r]) / (2.0 * step);
                    const double a = analytic.entries(static_cast<Eigen::Index>(r), k);
                    // Relative to the column's scale: pixel values carry
                    // rounding noise of order eps / step.
                    const double denom = std::max({std::abs(a), std::abs(num), 1e-3 * col_scale[k], 1e-7});
                    crop.max_rel_error = std::max(crop.max_rel_error, std::abs(a - num) / denom);
                    crop.checked++;
                }
            }
        }
    }
    out.push_back(bil);
    out.push_back(crop);

    if (opts.include_mlp) {
        GradcheckEntry mlp{"mlp_parameters", 0.0, 1e-5, 0};
        for (int n = 0; n < 3; ++n) {
            const auto r = mlp_gradient_check(8, opts.seed + 101 + n);
            mlp.max_rel_error = std::max(mlp.max_rel_error, r.max_rel_error);
            mlp.checked += r.checked;
        }
        out.push_back(mlp);
    }
    return out;
}

} // namespace perspcrop
