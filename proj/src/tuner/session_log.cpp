#include "tiersim/tuner/session_log.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tiersim/error.hpp"

namespace tiersim {

nlohmann::json session_record(std::size_t iteration, const Observation& obs, double incumbent_objective) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"iteration", iteration},
          {"config", knobs_to_json(obs.config)},
          {"objective_ns", num(obs.objective)},
          {"incumbent_objective_ns", num(incumbent_objective)},
          {"suggestion_kind", std::string(to_string(obs.kind))}};
}

SessionLog::SessionLog(const std::filesystem::path& path, const std::vector<Observation>& prefix)
    : out_(path, std::ios::trunc) {
  if (!out_) throw Error(ErrorKind::Io, "cannot open session log '" + path.string() + "'");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : prefix) {
    if (o.objective < best) best = o.objective;
    append(o, best);
  }
}

void SessionLog::append(const Observation& obs, double incumbent_objective) {
  out_ << session_record(++iteration_, obs, incumbent_objective).dump() << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorKind::Io, "write to session log failed");
}

std::vector<Observation> load_session(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open session log '" + path.string() + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(line);

  std::vector<Observation> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      const auto j = nlohmann::json::parse(lines[i]);
      if (j.at("iteration").get<std::size_t>() != out.size() + 1)
        throw Error(ErrorKind::Parse, "session log iterations are not consecutive at line " + std::to_string(i + 1));
      Observation o;
      o.config = knobs_from_json(j.at("config"));
      const auto& obj = j.at("objective_ns");
      o.objective = obj.is_null() ? std::numeric_limits<double>::infinity() : obj.get<double>();
      o.kind = suggestion_kind_from_string(j.at("suggestion_kind").get<std::string>());
      out.push_back(o);
    } catch (const nlohmann::json::exception& e) {
      if (i + 1 == lines.size()) break;
      throw Error(ErrorKind::Parse, "session log line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tiersim
