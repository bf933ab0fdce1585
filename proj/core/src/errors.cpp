#include "vulntopics/errors.hpp"

namespace vt {

ConfigError::ConfigError(const std::string& message, std::string field)
    : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

MissingArtifactError::MissingArtifactError(const std::string& artifact, const std::string& producer)
    : Error("missing " + artifact + " artifact; run " + producer + " first") {}

StaleArtifactError::StaleArtifactError(const std::string& artifact, const std::string& producer)
    : Error(artifact + " artifact was produced with a different configuration; run " + producer + " again") {}

}  // namespace vt
