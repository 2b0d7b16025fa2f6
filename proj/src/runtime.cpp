#include "cresim/runtime.hpp"

namespace cresim {

const char* to_string(ComponentStatus s) {
    switch (s) {
        case ComponentStatus::Running: return "Running";
        case ComponentStatus::Restarting: return "Restarting";
        case ComponentStatus::Down: return "Down";
    }
    return "?";
}

const char* to_string(FaultMsgKind k) {
    switch (k) {
        case FaultMsgKind::HangingProcess: return "HangingProcess";
        case FaultMsgKind::NetworkOutage: return "NetworkOutage";
        case FaultMsgKind::ProducerRecovered: return "ProducerRecovered";
    }
    return "?";
}

}  // namespace cresim
