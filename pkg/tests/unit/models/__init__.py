"""模型层测试"""
