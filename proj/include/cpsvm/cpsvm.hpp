#pragma once
#include <cpsvm/error.hpp>
#include <cpsvm/data/dataset.hpp>
#include <cpsvm/data/io.hpp>
#include <cpsvm/data/synth.hpp>
#include <cpsvm/lp/model.hpp>
#include <cpsvm/lp/simplex.hpp>
#include <cpsvm/lp/dump.hpp>
#include <cpsvm/prox.hpp>
#include <cpsvm/first_order/smoothing.hpp>
#include <cpsvm/first_order/apg.hpp>
#include <cpsvm/first_order/block_cd.hpp>
#include <cpsvm/svm/common.hpp>
#include <cpsvm/svm/l1_svm.hpp>
#include <cpsvm/svm/group_svm.hpp>
#include <cpsvm/svm/slope_svm.hpp>
#include <cpsvm/heuristics.hpp>
#include <cpsvm/driver.hpp>
#include <cpsvm/bench.hpp>
