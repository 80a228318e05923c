#pragma once

#include <string>

#include "json.hpp"

#include "isolab/hardness.hpp"
#include "isolab/isolators.hpp"
#include "isolab/sources.hpp"

namespace isolab::io {

using json = nlohmann::ordered_json;

// File formats. Bit strings use the project convention (leftmost character
// is position 1 = word bit 0). Rationals are "num/den" strings in lowest
// terms. See README for the full format reference.

json poly_map_to_json(const f2::F2PolyMap& f);
f2::F2PolyMap poly_map_from_json(const json& j);

json dist_to_json(const dist::ExactDist& d);
dist::ExactDist dist_from_json(const json& j);

json mixture_to_json(const dist::Mixture& m);
dist::Mixture mixture_from_json(const json& j);

json source_to_json(const sources::SourceSpec& s);
sources::SourceSpec source_from_json(const json& j);

json class_to_json(const sources::ClassSpec& c);
sources::ClassSpec class_from_json(const json& j);

std::string table_to_hex(const iso::BoolFnTable& t);
iso::BoolFnTable table_from_hex(int n, const std::string& hex);

json isolator_to_json(const iso::IsolatorSpec& s);
iso::IsolatorSpec isolator_from_json(const json& j);

json fn_table_to_json(const iso::MultiOutFnTable& t);
iso::MultiOutFnTable fn_table_from_json(const json& j);

json hash_member_to_json(const iso::HashFamily& fam, const Int& index);

json verify_result_to_json(const iso::VerifyResult& r);
json bound_report_to_json(const hard::BoundReport& r);
json counting_report_to_json(const hard::CountingSearchReport& r);

json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// FNV-1a 64-bit content hash, hex encoded; used for report provenance.
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace isolab::io
