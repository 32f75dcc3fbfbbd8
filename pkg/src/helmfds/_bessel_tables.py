"""Chebyshev coefficients for the order 0/1 Bessel functions (generated)."""

# Generated by tools/gen_bessel_tables.py; do not edit by hand.

J0_SMALL = (
    1.5772797147489011956e-1,
    -8.7234423528522212908e-3,
    2.6517861320333680987e-1,
    -3.7009499387264977903e-1,
    1.5806710233209726128e-1,
    -3.4893769411408885163e-2,
    4.8191800694676044968e-3,
    -4.606261662062750475e-4,
    3.2460328821005080806e-5,
    -1.7619469077621507495e-6,
    7.608163592418781867e-8,
    -2.6792535305576728983e-9,
    7.8486963144794644165e-11,
    -1.9438346867370165706e-12,
    4.1253205956343739326e-14,
    -7.5885081254475463376e-16,
    1.2218515873961411034e-17,
    -1.7367896077002367683e-19,
)

J1_SMALL = (
    8.1044846325658115105e-2,
    -1.4897514506765210906e-1,
    1.6099926235720970255e-1,
    -8.2680491766817906597e-2,
    2.221363965496603541e-2,
    -3.6469406007692759578e-3,
    4.0503377283548218331e-4,
    -3.2555548668572585168e-5,
    1.9858774049915167414e-6,
    -9.5219847567504361821e-8,
    3.6871337590971482385e-9,
    -1.1780266226958848398e-10,
    3.1601545803480033215e-12,
    -7.2217552396517734285e-14,
    1.4232144003513942316e-15,
    -2.4441972916190463893e-17,
    3.6912682997929332622e-19,
)

R0_SMALL = (
    3.645469809116044361e-2,
    -2.7832370940758248315e-1,
    2.9604999902071481676e-1,
    9.8255084081878640577e-2,
    -1.0755155280627783505e-1,
    3.1799074084414515427e-2,
    -5.161397105810714949e-3,
    5.4985253200390115387e-4,
    -4.1996983149420130705e-5,
    2.4290361107923793976e-6,
    -1.1049969793472956112e-7,
    4.066517365979110493e-9,
    -1.2374148898289852487e-10,
    3.1685725528945944421e-12,
    -6.9269560324310010835e-14,
    1.3086308625876684015e-15,
    -2.1586201986914483197e-17,
    3.1368631824799381496e-19,
)

R1_SMALL = (
    3.8300769852423778829e-2,
    -8.1825614127328264064e-2,
    -2.4867707612196400509e-2,
    4.796745275274698292e-2,
    -1.8525884510898022173e-2,
    3.6806076878235111017e-3,
    -4.6272540602933687152e-4,
    4.0694002695808698676e-5,
    -2.6617695125295626191e-6,
    1.3506026913254338045e-7,
    -5.4835241103362765753e-9,
    1.8245086841229007743e-10,
    -5.0706666365911291344e-12,
    1.1956162517587949013e-13,
    -2.4231624427124732278e-15,
    4.2681265130729623577e-17,
    -6.5960609787230412421e-19,
)

P0_LARGE = (
    9.9946034934751866537e-1,
    -5.3652204681321174247e-4,
    3.0751847875194746219e-6,
    -5.170594537606097701e-8,
    1.6306464635151383095e-9,
    -7.864091377237069999e-11,
    5.1682623873491924622e-12,
    -4.3045788699253912224e-13,
    4.3265957431549405642e-14,
    -5.0690340959352360775e-15,
    6.7480722157338737041e-16,
    -1.0011513723467785834e-16,
    1.6305919233744184736e-17,
    -2.880866169482871202e-18,
    5.4680827832590383688e-19,
    -1.1062036496829716611e-19,
)

Q0_LARGE = (
    -1.244468368426960728e-1,
    5.4708159540893196795e-4,
    -5.9315987288485178116e-6,
    1.4377965798375193428e-7,
    -5.8175327494930559835e-9,
    3.3760975237349907551e-10,
    -2.5653979367973077957e-11,
    2.404916100281365049e-12,
    -2.6690625482579415976e-13,
    3.4041800321963688986e-14,
    -4.8799441053120400078e-15,
    7.7297031762426053902e-16,
    -1.334885217150251704e-16,
    2.486595238939051547e-17,
    -4.952892629886515942e-18,
    1.0473158973776097239e-18,
    -2.3369301722114218899e-19,
)

P1_LARGE = (
    1.0009030408600136999,
    8.9898983308594085557e-4,
    -3.9872843004889085228e-6,
    6.1776339606442985349e-8,
    -1.8718907491063066087e-9,
    8.8168986595823388985e-11,
    -5.7048636403956447019e-12,
    4.6991955152305423752e-13,
    -4.6842237839904892216e-14,
    5.4526748960447171683e-15,
    -7.2211808422740179189e-16,
    1.0667689114335412457e-16,
    -1.7312313216116334973e-17,
    3.0492991197665872261e-18,
    -5.7724216549874536589e-19,
    1.1650571755711490528e-19,
)

Q1_LARGE = (
    3.7422229655628260193e-1,
    -7.7021788393256634594e-4,
    7.3108922063643632996e-6,
    -1.6767825107266737968e-7,
    6.5833546621204433032e-9,
    -3.7490909505415561844e-10,
    2.8121750359748864681e-11,
    -2.6114525394623199408e-12,
    2.8774212663332233544e-13,
    -3.6490019160618377554e-14,
    5.2066263662267071631e-15,
    -8.2153180254585942908e-16,
    1.4141084390211833283e-16,
    -2.6267615898385291684e-17,
    5.2192649196714082425e-18,
    -1.1012617187879590425e-18,
    2.4525932320263115108e-19,
)

