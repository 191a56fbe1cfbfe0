#include "ctgi/error.hpp"

namespace ctgi {

std::string_view errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::InvalidEmbedding: return "InvalidEmbedding";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::EmptyGallery: return "EmptyGallery";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::MissingRelevance: return "MissingRelevance";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::RowMismatch: return "RowMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::DimInconsistent: return "DimInconsistent";
    case Errc::IOError: return "IOError";
    case Errc::InvalidMessage: return "InvalidMessage";
    case Errc::BackendUnreachable: return "BackendUnreachable";
    case Errc::BackendRejected: return "BackendRejected";
    case Errc::ScriptExhausted: return "ScriptExhausted";
    case Errc::ReplayMismatch: return "ReplayMismatch";
    case Errc::EmptyReply: return "EmptyReply";
    case Errc::NoKeptTurns: return "NoKeptTurns";
    case Errc::ItemSetMismatch: return "ItemSetMismatch";
    case Errc::UnknownImage: return "UnknownImage";
    case Errc::SchemaTooSmall: return "SchemaTooSmall";
    case Errc::InvalidSchema: return "InvalidSchema";
    case Errc::IdMismatch: return "IdMismatch";
    case Errc::UsageError: return "UsageError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(errc_name(code)) + (detail.empty() ? "" : ": " + detail))
    , code_(code)
    , detail_(detail)
{
}

} // namespace ctgi
