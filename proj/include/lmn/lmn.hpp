#pragma once

#include "lmn/symbol.hpp"
#include "lmn/process.hpp"
#include "lmn/printer.hpp"
#include "lmn/links.hpp"
#include "lmn/parser.hpp"
#include "lmn/connectors.hpp"
#include "lmn/canonical.hpp"
#include "lmn/match.hpp"
#include "lmn/mell.hpp"
#include "lmn/step.hpp"
#include "lmn/statespace.hpp"
#include "lmn/proofnet/net.hpp"
#include "lmn/proofnet/encoding.hpp"
#include "lmn/proofnet/library.hpp"
#include "lmn/proofnet/table1.hpp"
