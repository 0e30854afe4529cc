"""Quadrature tables for triangle SBP operators (N = 1..4).

Generated by scripts/generate_tri_tables.py (run once, output frozen).
Volume nodes contain the per-face (N+1)-point Gauss-Legendre nodes;
volume weights are positive and exact to the degree noted per entry.
"""

TRI_TABLES = {
    1: {
        'exactness_degree': 2,
        'volume_nodes': [
            (0.5773502691896257, -1.0),
            (-1.0, 0.5773502691896257),
            (-0.5773502691896257, -1.0),
            (-1.0, -0.5773502691896257),
            (-0.5773502691896257, 0.5773502691896257),
            (0.5773502691896257, -0.5773502691896257),
            (-0.3333333333333333, -0.3333333333333333),
        ],
        'volume_weights': [
            0.16666666666666663,
            0.16666666666666663,
            0.16666666666666663,
            0.16666666666666663,
            0.16666666666666663,
            0.16666666666666663,
            1.0000000000000002,
        ],
        'face_t': [-0.5773502691896257, 0.5773502691896257],
        'face_w': [1.0, 1.0],
    },
    2: {
        'exactness_degree': 4,
        'volume_nodes': [
            (0.7745966692414834, -1.0),
            (-1.0, 0.7745966692414834),
            (-0.7745966692414834, -1.0),
            (-1.0, -0.7745966692414834),
            (-0.7745966692414834, 0.7745966692414834),
            (0.7745966692414834, -0.7745966692414834),
            (0.0, -1.0),
            (-1.0, 0.0),
            (0.0, 0.0),
            (-0.3333333333333333, -0.3333333333333333),
            (-0.732891630949396, 0.46578326189879204),
            (0.46578326189879204, -0.732891630949396),
            (-0.732891630949396, -0.732891630949396),
        ],
        'volume_weights': [
            0.022383751675332124,
            0.022383751675332124,
            0.022383751675332124,
            0.022383751675332124,
            0.022383751675332124,
            0.022383751675332124,
            0.14213450440936345,
            0.14213450440936345,
            0.14213450440936345,
            0.6058226932844609,
            0.277823761145152,
            0.277823761145152,
            0.277823761145152,
        ],
        'face_t': [-0.7745966692414834, 0.0, 0.7745966692414834],
        'face_w': [0.5555555555555557, 0.8888888888888888, 0.5555555555555557],
    },
    3: {
        'exactness_degree': 6,
        'volume_nodes': [
            (0.33998104358485626, -1.0),
            (-1.0, 0.33998104358485626),
            (-0.33998104358485626, -1.0),
            (-1.0, -0.33998104358485626),
            (-0.33998104358485626, 0.33998104358485626),
            (0.33998104358485626, -0.33998104358485626),
            (0.8611363115940525, -1.0),
            (-1.0, 0.8611363115940525),
            (-0.8611363115940525, -1.0),
            (-1.0, -0.8611363115940525),
            (-0.8611363115940525, 0.8611363115940525),
            (0.8611363115940525, -0.8611363115940525),
            (-0.15212518511037354, -0.6957496297792529),
            (-0.6957496297792529, -0.15212518511037354),
            (-0.15212518511037354, -0.15212518511037354),
            (-0.6845833168423523, 0.4656173282701882),
            (0.46561732827018826, -0.6845833168423523),
            (-0.781034011427836, 0.4656173282701882),
            (0.46561732827018826, -0.781034011427836),
            (-0.781034011427836, -0.6845833168423523),
            (-0.6845833168423523, -0.781034011427836),
        ],
        'volume_weights': [
            0.05399789961120297,
            0.05399789961120297,
            0.05399789961120297,
            0.05399789961120297,
            0.05399789961120297,
            0.05399789961120297,
            0.019432110768375418,
            0.019432110768375418,
            0.019432110768375418,
            0.019432110768375418,
            0.019432110768375418,
            0.019432110768375418,
            0.30870082526638765,
            0.30870082526638765,
            0.30870082526638765,
            0.10555291032056112,
            0.10555291032056112,
            0.10555291032056112,
            0.10555291032056112,
            0.10555291032056112,
            0.10555291032056112,
        ],
        'face_t': [-0.8611363115940526, -0.33998104358485626, 0.33998104358485626, 0.8611363115940526],
        'face_w': [0.3478548451374537, 0.6521451548625462, 0.6521451548625462, 0.3478548451374537],
    },
    4: {
        'exactness_degree': 7,
        'volume_nodes': [
            (0.538469310105683, -1.0),
            (-1.0, 0.538469310105683),
            (-0.538469310105683, -1.0),
            (-1.0, -0.538469310105683),
            (-0.538469310105683, 0.538469310105683),
            (0.538469310105683, -0.538469310105683),
            (0.9061798459386639, -1.0),
            (-1.0, 0.9061798459386639),
            (-0.9061798459386639, -1.0),
            (-1.0, -0.9061798459386639),
            (-0.9061798459386639, 0.9061798459386639),
            (0.9061798459386639, -0.9061798459386639),
            (0.0, -1.0),
            (-1.0, 0.0),
            (0.0, 0.0),
            (-0.3333333333333333, -0.3333333333333333),
            (-0.6730801142914351, 0.34616022858287027),
            (0.3461602285828702, -0.6730801142914351),
            (-0.6730801142914351, -0.6730801142914351),
            (-0.07920620767046327, -0.8415875846590735),
            (-0.8415875846590735, -0.07920620767046321),
            (-0.07920620767046327, -0.07920620767046321),
            (-0.8454601060017617, 0.6909202120035234),
            (0.6909202120035234, -0.8454601060017617),
            (-0.8454601060017617, -0.8454601060017617),
        ],
        'volume_weights': [
            0.04164330441754843,
            0.04164330441754843,
            0.04164330441754843,
            0.04164330441754843,
            0.04164330441754843,
            0.04164330441754843,
            0.009961009804457258,
            0.009961009804457258,
            0.009961009804457258,
            0.009961009804457258,
            0.009961009804457258,
            0.009961009804457258,
            0.009048097152693273,
            0.009048097152693273,
            0.009048097152693273,
            0.304392590406969,
            0.20593322267985265,
            0.20593322267985265,
            0.20593322267985265,
            0.20464507295812448,
            0.20464507295812448,
            0.20464507295812448,
            0.04236744862966189,
            0.04236744862966189,
            0.04236744862966189,
        ],
        'face_t': [-0.906179845938664, -0.5384693101056831, 0.0, 0.5384693101056831, 0.906179845938664],
        'face_w': [0.23692688505618942, 0.4786286704993662, 0.568888888888889, 0.4786286704993662, 0.23692688505618942],
    },
}
