#include <doctest.h>

#include <cmath>
#include <random>

#include "monometry/correction.hpp"
#include "oracles.hpp"

using namespace monometry;
using namespace monometry::correction;

namespace {

std::vector<PairedSample> samples_on(double (*f)(double), int n, double lo, double hi) {
  std::vector<PairedSample> out;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * i / (n - 1);
    out.push_back({x, f(x), "obj" + std::to_string(i)});
  }
  return out;
}

}  // namespace

TEST_CASE("exact polynomial data is fitted exactly") {
  const auto linear = samples_on([](double x) { return 2 * x + 1; }, 12, 1.0, 30.0);
  const CorrectionModel m1 = fit(linear, 1, Axis::width, CorrectionStage::dimension);
  CHECK(m1.coefficients[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m1.coefficients[1] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(m1.fit_min == doctest::Approx(1.0));
  CHECK(m1.fit_max == doctest::Approx(30.0));
  CHECK(m1.monotone_on_fit_range);

  const auto square = samples_on([](double x) { return x * x; }, 12, 1.0, 10.0);
  const CorrectionModel m2 = fit(square, 2, Axis::height, CorrectionStage::box_shape);
  CHECK(m2.coefficients[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(m2.coefficients[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(m2.coefficients[2] == doctest::Approx(1.0).epsilon(1e-9));

  // round trip through apply reproduces the data
  for (const auto& s : square)
    CHECK(apply(m2, s.predicted) == doctest::Approx(s.reference).epsilon(1e-9));
}

TEST_CASE("fit preconditions") {
  std::vector<PairedSample> tiny = {{1, 2, "a"}, {2, 3, "b"}};
  CHECK_THROWS_AS(fit(tiny, 1, Axis::width, CorrectionStage::dimension),
                  InsufficientSamples);

  std::vector<PairedSample> flat = {{5, 1, "a"}, {5, 2, "b"}, {5, 3, "c"}, {5, 4, "d"}};
  CHECK_THROWS_AS(fit(flat, 1, Axis::width, CorrectionStage::dimension), RankDeficient);

  std::vector<PairedSample> ok = {{1, 1, "a"}, {2, 2, "b"}, {3, 3, "c"}, {4, 4, "d"}};
  CHECK_THROWS_AS(fit(ok, 3, Axis::width, CorrectionStage::dimension), InvalidArgument);
}

TEST_CASE("noisy fits match an extended-precision normal-equation solve") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<PairedSample> samples;
    std::vector<double> xs, ys;
    for (int i = 0; i < 50; ++i) {
      const double x = oracles::uniform(rng, 2.0, 60.0);
      const double y =
          1.3 * x + 0.02 * x * x + 2.0 + oracles::uniform(rng, -1.0, 1.0);
      samples.push_back({x, y, "o" + std::to_string(i)});
      xs.push_back(x);
      ys.push_back(y);
    }
    for (int degree : {1, 2}) {
      const CorrectionModel model =
          fit(samples, degree, Axis::width, CorrectionStage::dimension);
      const Eigen::VectorXd expected = oracles::normal_equation_fit(xs, ys, degree);
      for (int k = 0; k <= degree; ++k)
        CHECK(model.coefficients[k] == doctest::Approx(expected[k]).epsilon(1e-6));

      // stated solver contract: relative normal-equation residual <= 1e-8
      Eigen::MatrixXd design(xs.size(), degree + 1);
      Eigen::VectorXd target(xs.size());
      for (size_t i = 0; i < xs.size(); ++i) {
        design(i, 0) = 1;
        for (int k = 1; k <= degree; ++k) design(i, k) = design(i, k - 1) * xs[i];
        target(i) = ys[i];
      }
      const Eigen::VectorXd atb = design.transpose() * target;
      const Eigen::VectorXd residual =
          design.transpose() * (design * model.coefficients - target);
      CHECK(residual.norm() <= 1e-8 * atb.norm());

      // least-squares centering: training residual mean ~ 0 (on the raw
      // polynomial; the applied value clamps at the physical floor)
      double mean_resid = 0;
      for (const auto& s : samples)
        mean_resid += s.reference - evaluate(model, s.predicted);
      mean_resid /= static_cast<double>(samples.size());
      CHECK(std::abs(mean_resid) < 1e-6 * (model.fit_max - model.fit_min));
    }

    // nested models: degree 2 never fits the training data worse
    const CorrectionModel d1 = fit(samples, 1, Axis::width, CorrectionStage::dimension);
    const CorrectionModel d2 = fit(samples, 2, Axis::width, CorrectionStage::dimension);
    auto training_rmse = [&](const CorrectionModel& m) {
      double sq = 0;
      for (const auto& s : samples) {
        const double r = s.reference - evaluate(m, s.predicted);
        sq += r * r;
      }
      return std::sqrt(sq / samples.size());
    };
    CHECK(training_rmse(d2) <= training_rmse(d1) + 1e-12);
  }
}

TEST_CASE("apply evaluates, clamps and flags extrapolation") {
  CorrectionModel identity;
  identity.degree = 1;
  identity.coefficients = Eigen::Vector2d(0.0, 1.0);
  identity.fit_min = 1.0;
  identity.fit_max = 50.0;
  CHECK(apply(identity, 17.25) == doctest::Approx(17.25));

  CorrectionModel affine = identity;
  affine.coefficients = Eigen::Vector2d(1.0, 2.0);
  CHECK(apply(affine, 3.0) == doctest::Approx(7.0));

  CorrectionModel crushing = identity;
  crushing.coefficients = Eigen::Vector2d(-5.0, 0.1);
  CHECK(apply(crushing, 2.0) == doctest::Approx(0.1));  // clamped floor

  CHECK_FALSE(extrapolates(identity, 25.0));
  CHECK(extrapolates(identity, 0.5));
  CHECK(extrapolates(identity, 51.0));
}

TEST_CASE("non-monotone fits are reported") {
  // reference bends downward hard enough that the parabola decreases at
  // the right end of the training range
  std::vector<PairedSample> bent;
  for (int i = 0; i <= 20; ++i) {
    const double x = 1.0 + i;
    bent.push_back({x, 30.0 - (x - 10) * (x - 10) * 0.4, "o" + std::to_string(i)});
  }
  const CorrectionModel model = fit(bent, 2, Axis::width, CorrectionStage::dimension);
  CHECK_FALSE(model.monotone_on_fit_range);
}

TEST_CASE("pipeline composition") {
  geometry::SizeEstimate raw;
  raw.dim_x_cm = 10.0;
  raw.dim_y_cm = 8.0;
  raw.stage = geometry::Stage::raw;

  SUBCASE("no models: passthrough") {
    const auto out = correct_pipeline({}, raw);
    CHECK(out.dim_x_cm == raw.dim_x_cm);
    CHECK(out.dim_y_cm == raw.dim_y_cm);
    CHECK(out.stage == geometry::Stage::raw);
  }

  auto model = [](double c0, double c1, Axis axis, CorrectionStage stage) {
    CorrectionModel m;
    m.degree = 1;
    m.coefficients = Eigen::Vector2d(c0, c1);
    m.axis = axis;
    m.stage = stage;
    m.fit_min = 0.1;
    m.fit_max = 100;
    return m;
  };

  SUBCASE("identity models advance the stage without changing values") {
    PipelineModels models;
    models.shape_width = model(0, 1, Axis::width, CorrectionStage::box_shape);
    models.shape_height = model(0, 1, Axis::height, CorrectionStage::box_shape);
    models.dim_width = model(0, 1, Axis::width, CorrectionStage::dimension);
    models.dim_height = model(0, 1, Axis::height, CorrectionStage::dimension);
    const auto out = correct_pipeline(models, raw);
    CHECK(out.dim_x_cm == doctest::Approx(raw.dim_x_cm));
    CHECK(out.dim_y_cm == doctest::Approx(raw.dim_y_cm));
    CHECK(out.stage == geometry::Stage::dim_corrected);
  }

  SUBCASE("shape applies before dimension") {
    PipelineModels models;
    models.shape_width = model(1, 2, Axis::width, CorrectionStage::box_shape);
    models.dim_width = model(3, 0.5, Axis::width, CorrectionStage::dimension);
    const auto out = correct_pipeline(models, raw);
    // dim(shape(10)) = 0.5*(2*10+1) + 3
    CHECK(out.dim_x_cm == doctest::Approx(13.5));
    CHECK(out.dim_y_cm == doctest::Approx(raw.dim_y_cm));
    CHECK(out.stage == geometry::Stage::dim_corrected);
  }

  SUBCASE("shape-only run is marked shape_corrected") {
    PipelineModels models;
    models.shape_width = model(0, 1.1, Axis::width, CorrectionStage::box_shape);
    const auto out = correct_pipeline(models, raw);
    CHECK(out.stage == geometry::Stage::shape_corrected);
  }

  SUBCASE("mis-slotted models are rejected") {
    PipelineModels models;
    models.shape_width = model(0, 1, Axis::height, CorrectionStage::box_shape);
    CHECK_THROWS_AS(correct_pipeline(models, raw), AxisMismatch);
    models.shape_width = model(0, 1, Axis::width, CorrectionStage::dimension);
    CHECK_THROWS_AS(correct_pipeline(models, raw), AxisMismatch);
  }
}

TEST_CASE("the strategy grid agrees with a hand-composed oracle") {
  // synthetic two-stage bias: annotated-box sizes distort the truth, raw
  // predictions distort the annotated sizes further
  std::mt19937_64 rng(202);
  std::vector<double> truth, annotated, predicted;
  for (int i = 0; i < 80; ++i) {
    const double t = oracles::uniform(rng, 5.0, 60.0);
    const double a = 1.15 * t + 1.0 + oracles::uniform(rng, -0.3, 0.3);
    const double p = 0.9 * a + 2.5 + 0.002 * a * a + oracles::uniform(rng, -0.3, 0.3);
    truth.push_back(t);
    annotated.push_back(a);
    predicted.push_back(p);
  }
  auto pairs = [](const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<PairedSample> out;
    for (size_t i = 0; i < x.size(); ++i)
      out.push_back({x[i], y[i], "o" + std::to_string(i)});
    return out;
  };

  // shape stage: predicted -> annotated; dimension stage fitted per shape
  // option on that option's output, mirroring a staged calibration
  std::vector<std::optional<CorrectionModel>> shape_options = {
      std::nullopt,
      fit(pairs(predicted, annotated), 1, Axis::width, CorrectionStage::box_shape),
      fit(pairs(predicted, annotated), 2, Axis::width, CorrectionStage::box_shape)};

  double no_correction_rmse = 0;
  double best_rmse = 1e30;
  for (const auto& shape : shape_options) {
    std::vector<double> shaped;
    for (double p : predicted) shaped.push_back(shape ? apply(*shape, p) : p);
    std::vector<std::optional<CorrectionModel>> dim_options = {
        std::nullopt,
        fit(pairs(shaped, truth), 1, Axis::width, CorrectionStage::dimension),
        fit(pairs(shaped, truth), 2, Axis::width, CorrectionStage::dimension)};
    for (const auto& dim : dim_options) {
      // library route
      PipelineModels models;
      models.shape_width = shape;
      models.dim_width = dim;
      double lib_sq = 0;
      for (size_t i = 0; i < predicted.size(); ++i) {
        geometry::SizeEstimate raw;
        raw.dim_x_cm = predicted[i];
        raw.dim_y_cm = 1.0;
        const auto corrected = correct_pipeline(models, raw);
        const double r = truth[i] - corrected.dim_x_cm;
        lib_sq += r * r;
      }
      const double lib_rmse = std::sqrt(lib_sq / predicted.size());

      // oracle route: manual polynomial composition
      double oracle_sq = 0;
      for (size_t i = 0; i < predicted.size(); ++i) {
        double v = predicted[i];
        for (const auto& m : {shape, dim}) {
          if (!m) continue;
          double acc = 0;
          for (int k = m->degree; k >= 0; --k) acc = acc * v + m->coefficients[k];
          v = std::max(acc, 0.1);
        }
        const double r = truth[i] - v;
        oracle_sq += r * r;
      }
      const double oracle_rmse = std::sqrt(oracle_sq / predicted.size());
      CHECK(lib_rmse == doctest::Approx(oracle_rmse).epsilon(1e-12));

      if (!shape && !dim) no_correction_rmse = lib_rmse;
      best_rmse = std::min(best_rmse, lib_rmse);
    }
  }
  // the synthetic bias is designed to be correctable
  CHECK(best_rmse < no_correction_rmse);
}

TEST_CASE("error reports") {
  SUBCASE("hand-checked values") {
    const std::vector<PairedSample> zero = {{3, 3, "a"}, {7, 7, "b"}};
    const ErrorReport r0 = error_report(zero);
    CHECK(r0.rmse == doctest::Approx(0.0));
    CHECK(r0.mae == doctest::Approx(0.0));

    const std::vector<PairedSample> pm = {{3, 4, "a"}, {4, 3, "b"}};  // residuals +1,-1
    const ErrorReport r1 = error_report(pm);
    CHECK(r1.rmse == doctest::Approx(1.0));
    CHECK(r1.mae == doctest::Approx(1.0));

    const std::vector<PairedSample> skew = {{1, 3, "a"}, {5, 5, "b"}};  // +2, 0
    const ErrorReport r2 = error_report(skew);
    CHECK(r2.rmse == doctest::Approx(std::sqrt(2.0)));
    CHECK(r2.mae == doctest::Approx(1.0));
  }

  SUBCASE("empty input raises") {
    CHECK_THROWS_AS(error_report({}), EmptyInput);
  }

  SUBCASE("rmse dominates mae and quartiles are ordered") {
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<PairedSample> samples;
      const int n = 1 + static_cast<int>(oracles::uniform(rng, 0, 40));
      for (int i = 0; i < n; ++i)
        samples.push_back({oracles::uniform(rng, 1, 50), oracles::uniform(rng, 1, 50),
                           "o" + std::to_string(i)});
      const ErrorReport rep = error_report(samples);
      CHECK(rep.rmse >= rep.mae - 1e-12);
      CHECK(rep.residual_min <= rep.q1);
      CHECK(rep.q1 <= rep.median);
      CHECK(rep.median <= rep.q3);
      CHECK(rep.q3 <= rep.residual_max);
    }
  }
}
