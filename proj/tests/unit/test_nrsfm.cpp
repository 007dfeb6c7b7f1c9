#include <gtest/gtest.h>

#include "nlreg/error.hpp"
#include "nlreg/metrics.hpp"
#include "nlreg/nrsfm.hpp"
#include "nlreg/synth.hpp"

using namespace nlreg;

namespace {

NrsfmOptions quick_options() {
  NrsfmOptions o;
  o.schedule = {1.0, 100.0, 10.0};
  o.solve.max_inner = 8;
  o.rounds = 2;
  return o;
}

}  // namespace

TEST(Nrsfm, GroundTruthCamerasSingleRound) {
  const NrsfmInstance inst = synth_nrsfm(12, 10, 0.6, 0.0, 0.0, 1);
  const NrsfmResult res = solve_nrsfm(inst.W, inst.cameras, quick_options());
  ASSERT_EQ(res.shapes.rows(), 36);
  ASSERT_EQ(res.shapes.cols(), 10);
  EXPECT_EQ(res.rounds.size(), 1u);
  ASSERT_EQ(res.reprojection.size(), 1u);
  for (std::size_t f = 0; f < 12; ++f)
    EXPECT_EQ(res.cameras.quaternions[f], inst.cameras.quaternions[f]);
  EXPECT_EQ(res.kernel.family, KernelFamily::Rbf);
  EXPECT_GT(res.kernel.gamma, 0.0);
  EXPECT_LT(e3d(res.shapes, inst.shapes), 0.5);
  EXPECT_TRUE(res.rounds.front().stage_energy_nonincreasing());
}

TEST(Nrsfm, EstimatedCamerasAlternate) {
  const NrsfmInstance inst = synth_nrsfm(12, 10, 0.4, 0.0, 0.0, 2);
  const NrsfmResult res = solve_nrsfm(inst.W, std::nullopt, quick_options());
  EXPECT_EQ(res.rounds.size(), 2u);
  ASSERT_EQ(res.cameras.size(), 12);
  // Later rounds run only the final penalty stage.
  EXPECT_EQ(res.rounds[1].stages.size(), 1u);
  EXPECT_DOUBLE_EQ(res.rounds[1].stages.front().rho, 100.0);
  for (double r : res.reprojection) EXPECT_TRUE(std::isfinite(r));
}

TEST(Nrsfm, LinearKernelAndFixedGamma) {
  const NrsfmInstance inst = synth_nrsfm(8, 8, 0.5, 0.0, 0.0, 3);
  NrsfmOptions o = quick_options();
  o.family = KernelFamily::Linear;
  EXPECT_EQ(solve_nrsfm(inst.W, inst.cameras, o).kernel.family, KernelFamily::Linear);
  o.family = KernelFamily::Rbf;
  o.gamma = 0.25;
  EXPECT_EQ(solve_nrsfm(inst.W, inst.cameras, o).kernel.gamma, 0.25);
}

TEST(Nrsfm, Deterministic) {
  const NrsfmInstance inst = synth_nrsfm(8, 8, 0.5, 0.2, 0.01, 4);
  const NrsfmResult a = solve_nrsfm(inst.W, inst.cameras, quick_options());
  const NrsfmResult b = solve_nrsfm(inst.W, inst.cameras, quick_options());
  EXPECT_TRUE(a.shapes == b.shapes);
}

TEST(Nrsfm, BadInput) {
  const NrsfmInstance inst = synth_nrsfm(6, 8, 0.5, 0.0, 0.0, 5);
  NrsfmOptions o = quick_options();
  o.rounds = 0;
  EXPECT_THROW(solve_nrsfm(inst.W, std::nullopt, o), InvalidInputError);
  CameraSequence short_cams = inst.cameras;
  short_cams.quaternions.pop_back();
  EXPECT_THROW(solve_nrsfm(inst.W, short_cams, quick_options()), ShapeMismatchError);
}
