#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qdpc/forward.hpp"
#include "qdpc/optics.hpp"
#include "qdpc/solvers.hpp"

namespace qdpc {

using Json = nlohmann::json;

/// Lowercase hex SHA-256.
[[nodiscard]] std::string sha256_hex(std::string_view bytes);
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

/// Parse errors surface as ConfigError, open failures as IoError.
[[nodiscard]] Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& value);

// Each *_from_json starts from `base` and overwrites the keys present.
// Unknown keys are rejected so that typos do not silently fall back to defaults.

[[nodiscard]] Json to_json(const OpticalConfig& c);
[[nodiscard]] OpticalConfig optical_config_from_json(const Json& j, OpticalConfig base = {});

[[nodiscard]] Json to_json(const SourceGeometry& g);
[[nodiscard]] SourceGeometry source_geometry_from_json(const Json& j);

[[nodiscard]] Json axes_to_json(const std::vector<Axis>& axes);
[[nodiscard]] std::vector<Axis> axes_from_json(const Json& j);

[[nodiscard]] Json to_json(const PhantomSpec& p);
[[nodiscard]] PhantomSpec phantom_spec_from_json(const Json& j, PhantomSpec base = {});

[[nodiscard]] Json to_json(const NoiseSpec& n);
[[nodiscard]] NoiseSpec noise_spec_from_json(const Json& j, NoiseSpec base = {});

[[nodiscard]] Json to_json(const TikhonovConfig& c);
[[nodiscard]] Json to_json(const TvConfig& c);
[[nodiscard]] Json to_json(const HqsConfig& c);
[[nodiscard]] Json to_json(const RldConfig& c);
[[nodiscard]] TikhonovConfig tikhonov_config_from_json(const Json& j, TikhonovConfig base = {});
[[nodiscard]] TvConfig tv_config_from_json(const Json& j, TvConfig base = {});
[[nodiscard]] HqsConfig hqs_config_from_json(const Json& j, HqsConfig base = {});
[[nodiscard]] RldConfig rld_config_from_json(const Json& j, RldConfig base = {});

/// Throws ConfigError naming the first key of `j` not in `allowed`.
void require_known_keys(const Json& j, const std::vector<std::string>& allowed, const char* what);

}  // namespace qdpc
