from setuptools import setup,find_packages
from typing import List

hypen_e_dot = '-e .'
def get_requirements(file_path:str)->List[str]:
    '''
    This function returns the install requirements, without comments,
    blank lines or the editable-install line

    '''
    requirements=[]
    with open(file_path) as file_obj:
        requirements=file_obj.readlines()
        requirements=[req.split("#")[0].strip() for req in requirements]
        requirements=[req for req in requirements if req]

        if hypen_e_dot in requirements:
            requirements.remove(hypen_e_dot)

    return requirements

setup(
      name="splitib",
      version="0.1",
      description="Dynamic split inference with cascaded bottleneck training and information-plane analysis",
      packages=find_packages(exclude=["tests", "examples", "examples.*"]),
      py_modules=["cli", "app"],
      install_requires=get_requirements('requirements.txt'),
      entry_points={"console_scripts": ["splitib=cli:main"]},
      python_requires=">=3.10",
      )
