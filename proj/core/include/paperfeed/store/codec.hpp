#pragma once

#include <nlohmann/json.hpp>

#include "paperfeed/store/types.hpp"

// JSON mapping for the store's row types; also the export/import line format.
namespace paperfeed::store {

void to_json(nlohmann::json& j, const StoredPost& p);
void from_json(const nlohmann::json& j, StoredPost& p);
void to_json(nlohmann::json& j, const InteractionRecord& r);
void from_json(const nlohmann::json& j, InteractionRecord& r);
void to_json(nlohmann::json& j, const UserRecord& u);
void from_json(const nlohmann::json& j, UserRecord& u);
void to_json(nlohmann::json& j, const RecommendationList& r);
void from_json(const nlohmann::json& j, RecommendationList& r);
void to_json(nlohmann::json& j, const CounterfactualRecord& r);
void from_json(const nlohmann::json& j, CounterfactualRecord& r);
void to_json(nlohmann::json& j, const AccessLog& a);
void from_json(const nlohmann::json& j, AccessLog& a);

}  // namespace paperfeed::store
