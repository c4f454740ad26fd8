#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kqlearn/design.hpp"
#include "kqlearn/kernels.hpp"
#include "kqlearn/mdp.hpp"

namespace kqlearn {

using Json = nlohmann::json;

/// {"kind": "se"|"matern"|"linear"|"finite_rank", "lengthscale", "nu", "offset", "eigenvalues"}.
KernelSpec kernel_from_json(const Json& j);
Json kernel_to_json(const KernelSpec& k);

/// {"n_states", "n_actions", "gamma", "transition", "reward", "embedding"}.
FiniteMdp mdp_from_json(const Json& j);
Json mdp_to_json(const FiniteMdp& m);

Json read_json_file(const std::string& path);
/// Parses text as JSON when it looks like an object, else reads it as a path.
Json json_from_text_or_file(const std::string& text_or_path);
void write_text_file(const std::string& path, std::string_view text);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view s);

std::vector<std::string> split_csv_line(std::string_view line);

/// Rows of comma-separated coordinates, optional non-numeric header.
PointList read_points_csv(std::istream& in);

/// step,grid_index,sigma2,info_gain_prefix
void write_design_csv(std::ostream& out, const GreedyTrace& trace, const std::vector<double>& gain_prefix);

/// state,action,q_star,v_star
void write_oracle_csv(std::ostream& out, const OptimalValues& values);

/// 64-bit FNV-1a, used for config fingerprints in metadata.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace kqlearn
