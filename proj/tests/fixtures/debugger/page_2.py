# lectern scene page=2 stage=generated
from manim import *


def fit(mob, cx, cy, w, h):
    if mob.width > 0:
        mob.scale_to_fit_width(w)
    if mob.height > h:
        mob.scale_to_fit_height(h)
    return mob.move_to([cx, cy, 0])


class Page2(Scene):
    def construct(self):
        # @@anchor:a_title@@ verb=appear t=- d=1.000000 targets=title
        m_0 = fit(Text("Gradient descent"), 0.000000, 3.800000, 12.000000, 0.800000)
        self.play(FadeIn(m_0), run_time=1.000000)
        # @@anchor:a_b1@@ verb=appear t=- d=0.800000 targets=b1
        m_1 = fit(Text("Follow the negative gradient"), -2.500000, 2.600000, 10.000000, 0.700000)
        self.play(FadeIn(m_1), run_time=0.800000)
        # @@anchor:a_b2@@ verb=appear t=- d=0.800000 targets=b2
        m_2 = fit(Text("Step size matters"), -2.500000, 1.700000, 10.000000, 0.700000)
        self.play(FadeIn(m_2), run_time=0.800000)
        # @@anchor:a_f1@@ verb=appear t=- d=1.500000 targets=f1
        m_3 = fit(MathTex("x_{t+1} = x_t - \\eta \\nabla f(x_t)"), 4.500000, 1.000000, 5.000000, 1.600000)
        self.play(FadeIn(m_3), run_time=1.500000)
        # @@anchor:h_f1@@ verb=highlight t=- d=0.500000 targets=f1
        self.play(Indicate(m_3), run_time=0.500000)
