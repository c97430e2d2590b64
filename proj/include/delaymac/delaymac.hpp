#pragma once

#include "delaymac/bias.hpp"
#include "delaymac/cell.hpp"
#include "delaymac/config.hpp"
#include "delaymac/design_space.hpp"
#include "delaymac/energy.hpp"
#include "delaymac/error.hpp"
#include "delaymac/jitter.hpp"
#include "delaymac/model.hpp"
#include "delaymac/multiplier.hpp"
#include "delaymac/report.hpp"
#include "delaymac/units.hpp"
