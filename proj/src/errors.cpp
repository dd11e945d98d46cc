#include "netlens/errors.hpp"

namespace netlens {

const char* errc_name(errc c) {
    switch (c) {
        case errc::invalid_threshold: return "InvalidThreshold";
        case errc::empty_input: return "EmptyInput";
        case errc::empty_month: return "EmptyMonth";
        case errc::empty_day: return "EmptyDay";
        case errc::empty_seed: return "EmptySeed";
        case errc::no_valid_entries: return "NoValidEntries";
        case errc::series_too_short: return "SeriesTooShort";
        case errc::no_tokens: return "NoTokens";
        case errc::no_download: return "NoDownload";
        case errc::ambiguous_value: return "AmbiguousValue";
        case errc::no_header: return "NoHeader";
        case errc::empty_table: return "EmptyTable";
        case errc::not_a_number: return "NotANumber";
        case errc::unknown_unit: return "UnknownUnit";
        case errc::duplicate_month: return "DuplicateMonth";
        case errc::config_error: return "ConfigError";
        case errc::auth_error: return "AuthError";
        case errc::transient_exhausted: return "TransientExhausted";
        case errc::malformed_response: return "MalformedResponse";
        case errc::image_unavailable: return "ImageUnavailable";
        case errc::fixture_miss: return "FixtureMiss";
        case errc::spec_infeasible: return "SpecInfeasible";
        case errc::provider_error: return "ProviderError";
    }
    return "UnknownError";
}

}  // namespace netlens
