#include "grading/render.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "grading/codec.hpp"
#include "grading/hmap_io.hpp"

namespace grading {

std::vector<std::uint8_t> encode_pgm(const DiffMap& delta, double range) {
  if (!(range > 0.0)) range = 1.0;
  const std::string header =
      "P5\n" + std::to_string(delta.cols()) + " " + std::to_string(delta.rows()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + delta.size());
  for (std::size_t i = 0; i < delta.rows(); ++i) {
    const std::size_t r = delta.rows() - 1 - i;
    for (std::size_t c = 0; c < delta.cols(); ++c) {
      const double t = std::clamp(0.5 + 0.5 * delta.at(r, c) / range, 0.0, 1.0);
      out.push_back(static_cast<std::uint8_t>(std::lround(t * 255.0)));
    }
  }
  return out;
}

RenderSummary render_episode(const EpisodeRecord& record, const Config& config,
                             const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::io_failure, "cannot create " + out.string());

  GradingEnv env(config);
  env.reset(record.spec, record.seed);
  double range = 0.0;
  const DiffMap initial = env.delta();
  for (double v : initial.values()) range = std::max(range, std::abs(v));

  RenderSummary summary;
  std::string trajectory = "# t x y heading\n";
  auto add_pose = [&](std::size_t t, const DozerPose& p) {
    trajectory += std::to_string(t) + " " + format_double(p.x) + " " + format_double(p.y) + " " +
                  format_double(p.heading) + "\n";
    ++summary.trajectory_points;
  };
  auto add_frame = [&](std::size_t t) {
    write_file_bytes(out / ("delta_" + std::to_string(t) + ".pgm"), encode_pgm(env.delta(), range));
    ++summary.frames;
  };

  add_frame(0);
  add_pose(0, env.dozer().pose);
  for (std::size_t i = 0; i < record.steps.size() && !env.terminated(); ++i) {
    const WaypointAction& a = record.steps[i].action;
    try {
      GradingEnv preview = env.fork();
      for (const auto& low : preview.plan(a)) {
        preview.execute(low);
        add_pose(i + 1, preview.dozer().pose);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::unreachable_pixel) throw;
    }
    env.step(a);
    add_frame(i + 1);
  }
  write_file_bytes(out / "trajectory.txt",
                   std::span(reinterpret_cast<const std::uint8_t*>(trajectory.data()), trajectory.size()));
  return summary;
}

}  // namespace grading
