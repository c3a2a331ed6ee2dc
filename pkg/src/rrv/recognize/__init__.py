from .bow import Codebook, Dictionary, encode_bow, kmeans, learn_codebook, learn_dictionary
from .dtw import DtwResult, dtw, dtw_from_costs, knn_classify_1, nearest_neighbor, part_dtw_cost
from .svm import SvmModel, chi2_kernel, svm_predict, svm_train
